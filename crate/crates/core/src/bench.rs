//! Experiment runner for the Vandermonde-vs-adjacency effort comparison, the
//! plaintext key-agreement exchange, and the six-node worked example.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cost::{measured_key_agreement, CostLedger, CostModelSpec};
use crate::error::{Error, Result};
use crate::field::{largest_prime_leq, PrimeField, MAX_MODULUS};
use crate::fixtures;
use crate::matrix::FieldMatrix;
use crate::modified::{
    build_modified_adjacency, node_public_column, setup_modified_scheme, NetworkTopology,
};
use crate::original::{
    pairwise_key, public_column_from, setup_original_scheme, setup_random_baseline,
    NodeKeyMaterial, PublicKnowledge, SchemeInstance, SchemeParams, SecretMatrix, SecretSource,
};
use crate::Residue;

/// Attempts allowed when drawing a connected random topology.
pub const MAX_TOPOLOGY_DRAWS: usize = 100;

/// One public-column announcement sent in plaintext.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(bound = "")]
pub struct ExchangeMessage<T: Residue> {
    pub from: usize,
    pub to: usize,
    pub public: PublicKnowledge<T>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(bound = "")]
pub struct AgreementOutcome<T: Residue> {
    pub i: usize,
    pub j: usize,
    /// `K_ij` as computed by node `i`.
    pub key_i: T,
    /// `K_ji` as computed by node `j`.
    pub key_j: T,
    pub agreed: bool,
    pub messages: [ExchangeMessage<T>; 2],
}

/// Nodes `i` and `j` swap their public information and each derive the pairwise key.
pub fn run_key_agreement_exchange<T: Residue>(
    nodes: &[NodeKeyMaterial<T>],
    i: usize,
    j: usize,
) -> Result<AgreementOutcome<T>> {
    if i == j {
        return Err(Error::SameNode(i));
    }
    let find = |id: usize| {
        nodes
            .iter()
            .find(|m| m.node_id == id)
            .ok_or(Error::Unprovisioned(id))
    };
    let (a, b) = (find(i)?, find(j)?);
    if a.field != b.field || a.lambda != b.lambda {
        return Err(Error::MaterialMismatch(format!(
            "nodes {i} and {j} were provisioned with different parameters"
        )));
    }
    let to_j = ExchangeMessage {
        from: i,
        to: j,
        public: a.public.clone(),
    };
    let to_i = ExchangeMessage {
        from: j,
        to: i,
        public: b.public.clone(),
    };
    let col_j = public_column_from(&to_i.public, a.lambda, &a.field)?;
    let col_i = public_column_from(&to_j.public, b.lambda, &b.field)?;
    let key_i = pairwise_key(&a.private_row, &col_j, &a.field)?.key;
    let key_j = pairwise_key(&b.private_row, &col_i, &b.field)?.key;
    Ok(AgreementOutcome {
        i,
        j,
        key_i,
        key_j,
        agreed: key_i == key_j,
        messages: [to_j, to_i],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Baseline {
    /// The original scheme with a Vandermonde public matrix.
    #[default]
    Vandermonde,
    /// A uniformly random public matrix stored column by column.
    RandomMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TopologySource {
    Random { edge_probability: f64 },
    Fixture { topology: NetworkTopology },
}

impl Default for TopologySource {
    fn default() -> Self {
        TopologySource::Random {
            edge_probability: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    pub lambda: usize,
    pub field_bounds: Vec<u64>,
    pub trials: usize,
    #[serde(default)]
    pub topology: TopologySource,
    pub rng_seed: u64,
    #[serde(default)]
    pub cost_model: CostModelSpec,
    #[serde(default)]
    pub baseline: Baseline,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.trials < 1 {
            return bad("trials must be at least 1".into());
        }
        if self.lambda < 1 || self.lambda + 1 > self.n {
            return bad(format!("need 1 <= lambda and lambda + 1 <= n, got lambda={} n={}", self.lambda, self.n));
        }
        if self.field_bounds.is_empty() {
            return bad("no field bounds".into());
        }
        for &b in &self.field_bounds {
            if b < self.n as u64 + 2 {
                return bad(format!("bound {b} below n + 2"));
            }
            if b as u128 > MAX_MODULUS {
                return bad(format!("bound {b} above {MAX_MODULUS}"));
            }
            match largest_prime_leq(b) {
                Some(q) if q > self.n as u64 => {}
                _ => return bad(format!("no prime q with n < q <= {b}")),
            }
        }
        match &self.topology {
            TopologySource::Random { edge_probability } if !(0.0..=1.0).contains(edge_probability) => {
                return bad(format!("edge probability {edge_probability} outside [0, 1]"));
            }
            TopologySource::Fixture { topology } if topology.node_count() != self.n => {
                return bad(format!(
                    "fixture topology has {} nodes, config says {}",
                    topology.node_count(),
                    self.n
                ));
            }
            _ => {}
        }
        self.cost_model.validate()
    }
}

/// A set of experiments run in order; the CLI's `bench --config` input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchPlan {
    pub experiments: Vec<ExperimentConfig>,
}

impl BenchPlan {
    /// N=6 with λ=3 and N=8 with λ=6 over bounds 50..=350 step 50, 10 trials each.
    pub fn reference_grid(rng_seed: u64) -> Self {
        let bounds: Vec<u64> = (1..=7).map(|k| 50 * k).collect();
        let config = |n, lambda| ExperimentConfig {
            n,
            lambda,
            field_bounds: bounds.clone(),
            trials: 10,
            topology: TopologySource::default(),
            rng_seed,
            cost_model: CostModelSpec::default(),
            baseline: Baseline::Vandermonde,
        };
        Self {
            experiments: vec![config(6, 3), config(8, 6)],
        }
    }

    pub fn run(&self) -> Result<Vec<ComparisonRow>> {
        let mut rows = Vec::new();
        for config in &self.experiments {
            rows.extend(run_experiment(config)?);
        }
        Ok(rows)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeLabel {
    Original,
    Modified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub n: usize,
    pub lambda: usize,
    pub bound: u64,
    pub q: u64,
    pub scheme: SchemeLabel,
    pub trial_count: usize,
    pub mean_total_effort: f64,
    pub mean_digit_mults: f64,
    pub mean_digit_adds: f64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Per-trial seed derived from the config seed, the bound and the trial index.
pub fn trial_seed(config_seed: u64, bound: u64, trial: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(config_seed) ^ bound) ^ trial as u64)
}

/// Both instances of one trial, sharing a topology and a secret matrix.
pub struct TrialInstances {
    pub original: SchemeInstance<u64>,
    pub modified: SchemeInstance<u64>,
}

pub fn build_trial(config: &ExperimentConfig, bound: u64, trial: usize) -> Result<TrialInstances> {
    let q = largest_prime_leq(bound).ok_or_else(|| Error::Config(format!("no prime <= {bound}")))?;
    let field = PrimeField::new(q)?;
    let params = SchemeParams::new(field, config.n, config.lambda)?;
    let seed = trial_seed(config.rng_seed, bound, trial);
    let topology = match &config.topology {
        TopologySource::Random { edge_probability } => NetworkTopology::random_connected(
            config.n,
            *edge_probability,
            splitmix64(seed ^ 1),
            MAX_TOPOLOGY_DRAWS,
        )?,
        TopologySource::Fixture { topology } => topology.clone(),
    };
    let secret = crate::original::gen_secret_matrix(&params, splitmix64(seed ^ 2));
    let original = match config.baseline {
        Baseline::Vandermonde => setup_original_scheme(params, SecretSource::Injected(secret.clone()))?,
        Baseline::RandomMatrix => setup_random_baseline(
            params,
            splitmix64(seed ^ 3),
            SecretSource::Injected(secret.clone()),
        )?,
    };
    let modified = setup_modified_scheme(&topology, config.lambda, &field, SecretSource::Injected(secret))?;
    Ok(TrialInstances { original, modified })
}

/// Total cost of one key derivation per unordered pair (node `i` derives `K_ij`, `i < j`),
/// after confirming every pair agrees.
pub fn all_pairs_effort(instance: &SchemeInstance<u64>, spec: &CostModelSpec) -> Result<CostLedger> {
    let n = instance.params.n;
    let mut total = CostLedger::default();
    for i in 1..=n {
        for j in i + 1..=n {
            let outcome = run_key_agreement_exchange(&instance.nodes, i, j)?;
            if !outcome.agreed {
                return Err(Error::MaterialMismatch(format!(
                    "nodes {i} and {j} disagree: {} vs {}",
                    outcome.key_i, outcome.key_j
                )));
            }
            let measured = measured_key_agreement(instance, i, j, spec)?;
            if measured.key != outcome.key_i {
                return Err(Error::MaterialMismatch(format!(
                    "measured key for ({i},{j}) differs from the exchange"
                )));
            }
            total += measured.ledger;
        }
    }
    Ok(total)
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ComparisonRow>> {
    config.validate()?;
    let mut rows = Vec::with_capacity(config.field_bounds.len() * 2);
    for &bound in &config.field_bounds {
        let q = largest_prime_leq(bound).expect("validated");
        let mut original = Vec::with_capacity(config.trials);
        let mut modified = Vec::with_capacity(config.trials);
        for trial in 0..config.trials {
            let t = build_trial(config, bound, trial)?;
            original.push(all_pairs_effort(&t.original, &config.cost_model)?);
            modified.push(all_pairs_effort(&t.modified, &config.cost_model)?);
        }
        for (scheme, ledgers) in [(SchemeLabel::Original, original), (SchemeLabel::Modified, modified)] {
            let mean = |f: fn(&CostLedger) -> u64| {
                ledgers.iter().map(f).sum::<u64>() as f64 / ledgers.len() as f64
            };
            rows.push(ComparisonRow {
                n: config.n,
                lambda: config.lambda,
                bound,
                q,
                scheme,
                trial_count: ledgers.len(),
                mean_total_effort: mean(|l| l.total_effort),
                mean_digit_mults: mean(|l| l.digit_mults),
                mean_digit_adds: mean(|l| l.digit_adds),
            });
        }
    }
    Ok(rows)
}

/// `original − modified` mean effort per `(n, λ, bound)`, in row order.
pub fn effort_gaps(rows: &[ComparisonRow]) -> Vec<(usize, usize, u64, f64)> {
    rows.iter()
        .filter(|r| r.scheme == SchemeLabel::Original)
        .filter_map(|o| {
            rows.iter()
                .find(|m| {
                    m.scheme == SchemeLabel::Modified
                        && (m.n, m.lambda, m.bound) == (o.n, o.lambda, o.bound)
                })
                .map(|m| (o.n, o.lambda, o.bound, o.mean_total_effort - m.mean_total_effort))
        })
        .collect()
}

pub fn rows_to_csv(rows: &[ComparisonRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Csv(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Csv(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Csv(e.to_string()))
}

pub fn rows_from_csv(s: &str) -> Result<Vec<ComparisonRow>> {
    csv::Reader::from_reader(s.as_bytes())
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Csv(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GoldenCheck {
    pub name: &'static str,
    pub ok: bool,
    pub expected: String,
    pub actual: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DemoReport {
    pub checks: Vec<GoldenCheck>,
    pub share: Vec<Vec<u64>>,
    pub raw_keys: Vec<Vec<u128>>,
    pub asymmetric_pairs: usize,
}

impl DemoReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }

    pub fn first_mismatch(&self) -> Option<&GoldenCheck> {
        self.checks.iter().find(|c| !c.ok)
    }
}

impl fmt::Display for DemoReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "share matrix A = (D.G)^T mod {}:", fixtures::EXAMPLE_Q)?;
        for row in &self.share {
            writeln!(f, "  {row:?}")?;
        }
        writeln!(f, "raw K = A.G:")?;
        for row in &self.raw_keys {
            writeln!(f, "  {row:?}")?;
        }
        for c in &self.checks {
            let mark = if c.ok { "ok  " } else { "FAIL" };
            write!(f, "[{mark}] {}", c.name)?;
            if !c.ok {
                write!(f, " expected {} got {}", c.expected, c.actual)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

fn check<V: fmt::Debug + PartialEq>(name: &'static str, expected: V, actual: V) -> GoldenCheck {
    GoldenCheck {
        name,
        ok: expected == actual,
        expected: format!("{expected:?}"),
        actual: format!("{actual:?}"),
    }
}

/// Runs the six-node example (q=29, λ=3) from the bundled fixtures and checks every
/// golden value.
pub fn demo_worked_example() -> Result<DemoReport> {
    let field = PrimeField::<u64>::new(fixtures::EXAMPLE_Q)?;
    let topo = NetworkTopology::from_json(fixtures::EXAMPLE_TOPOLOGY_JSON)
        .map_err(|e| Error::Config(e.to_string()))?;
    let d = SecretMatrix::new(FieldMatrix::from_rows(&fixtures::EXAMPLE_SECRET, &field)?)?;
    let inst = setup_modified_scheme(&topo, fixtures::EXAMPLE_LAMBDA, &field, SecretSource::Injected(d))?;
    let rows = |m: &[[u64; 6]]| m.iter().map(|r| r.to_vec()).collect::<Vec<_>>();

    let adj = build_modified_adjacency(&topo, &field);
    let keys = inst.key_matrix()?;
    let share = inst.share.matrix().to_rows();
    let k25 = pairwise_key(
        &inst.node(2)?.private_row,
        &node_public_column(&topo, 5, fixtures::EXAMPLE_LAMBDA, &field)?,
        &field,
    )?;
    let k52 = pairwise_key(
        &inst.node(5)?.private_row,
        &node_public_column(&topo, 2, fixtures::EXAMPLE_LAMBDA, &field)?,
        &field,
    )?;
    let exchange = run_key_agreement_exchange(&inst.nodes, 2, 5)?;
    let n = keys.reduced.rows();
    let asymmetric_pairs = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .filter(|&(i, j)| keys.reduced.get(i, j) != keys.reduced.get(j, i))
        .count();

    let checks = vec![
        check("modified adjacency matrix", rows(&fixtures::EXAMPLE_MODIFIED_ADJACENCY), adj.matrix.to_rows()),
        check("public matrix G", rows(&fixtures::EXAMPLE_PUBLIC), inst.public.matrix.to_rows()),
        check(
            "share matrix A",
            fixtures::EXAMPLE_SHARE.iter().map(|r| r.to_vec()).collect::<Vec<_>>(),
            share.clone(),
        ),
        check(
            "raw key matrix K",
            fixtures::EXAMPLE_RAW_KEYS.iter().map(|r| r.to_vec()).collect::<Vec<_>>(),
            keys.raw.clone(),
        ),
        check("K(2,5) raw", 808, k25.raw),
        check("K(2,5) mod 29", 25, k25.key),
        check("K(5,2) raw", 1214, k52.raw),
        check("K(5,2) mod 29", 25, k52.key),
        check("nodes 2 and 5 agree", (true, 25, 25), (exchange.agreed, exchange.key_i, exchange.key_j)),
        check("asymmetric pairs in K mod 29", 0, asymmetric_pairs),
    ];
    Ok(DemoReport {
        checks,
        share,
        raw_keys: keys.raw,
        asymmetric_pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_instance() -> SchemeInstance<u64> {
        let field = PrimeField::new(29).unwrap();
        let d = SecretMatrix::new(FieldMatrix::from_rows(&fixtures::EXAMPLE_SECRET, &field).unwrap()).unwrap();
        let topo = NetworkTopology::new(6, fixtures::EXAMPLE_EDGES).unwrap();
        setup_modified_scheme(&topo, 3, &field, SecretSource::Injected(d)).unwrap()
    }

    #[test]
    fn exchange_examples() {
        let inst = example_instance();
        let out = run_key_agreement_exchange(&inst.nodes, 2, 5).unwrap();
        assert!(out.agreed);
        assert_eq!((out.key_i, out.key_j), (25, 25));
        assert_eq!(out.messages[0].public, PublicKnowledge::Adjacency { neighbors: vec![1, 4] });
        for i in 1..=6 {
            for j in 1..=6 {
                if i != j {
                    assert!(run_key_agreement_exchange(&inst.nodes, i, j).unwrap().agreed);
                }
            }
        }
        assert_eq!(run_key_agreement_exchange(&inst.nodes, 3, 3), Err(Error::SameNode(3)));
        assert_eq!(run_key_agreement_exchange(&inst.nodes[..4], 1, 6), Err(Error::Unprovisioned(6)));
    }

    #[test]
    fn exchange_matches_topology_derivation() {
        let inst = example_instance();
        let topo = inst.topology.as_ref().unwrap();
        let field = *inst.field();
        for i in 1..=6 {
            for j in 1..=6 {
                let col = node_public_column(topo, j, 3, &field).unwrap();
                let local = pairwise_key(&inst.node(i).unwrap().private_row, &col, &field).unwrap().key;
                assert_eq!(local, inst.key(i, j).unwrap());
            }
        }
    }

    #[test]
    fn demo_passes() {
        let report = demo_worked_example().unwrap();
        assert!(report.passed(), "{report}");
        assert_eq!(report.raw_keys[5], vec![690, 528, 852, 960, 906, 1176]);
        assert_eq!(report.asymmetric_pairs, 0);
        assert_eq!(report.first_mismatch(), None);
    }

    #[test]
    fn config_validation() {
        let mut c = BenchPlan::reference_grid(1).experiments[0].clone();
        assert!(c.validate().is_ok());
        c.trials = 0;
        assert!(c.validate().is_err());
        let mut c = BenchPlan::reference_grid(1).experiments[1].clone();
        c.field_bounds = vec![10];
        // largest prime <= 10 is 7, not above n = 8
        assert!(c.validate().is_err());
        c.field_bounds = vec![9];
        assert!(c.validate().is_err());
        let mut c = BenchPlan::reference_grid(1).experiments[0].clone();
        c.lambda = 6;
        assert!(c.validate().is_err());
        c.lambda = 3;
        c.topology = TopologySource::Random { edge_probability: 1.5 };
        assert!(c.validate().is_err());
        c.topology = TopologySource::Fixture { topology: NetworkTopology::new(5, []).unwrap() };
        assert!(c.validate().is_err());
    }

    #[test]
    fn experiment_rows_and_determinism() {
        let mut c = BenchPlan::reference_grid(42).experiments[0].clone();
        c.trials = 1;
        c.field_bounds = vec![50, 100];
        let a = run_experiment(&c).unwrap();
        assert_eq!(a.len(), 4);
        assert_eq!(a, run_experiment(&c).unwrap());
        assert_eq!(a[0].q, 47);
        assert_eq!(a[0].scheme, SchemeLabel::Original);
        assert_eq!(a[1].scheme, SchemeLabel::Modified);
        assert!(a.iter().all(|r| r.trial_count == 1));
        assert_eq!(rows_from_csv(&rows_to_csv(&a).unwrap()).unwrap(), a);
    }

    #[test]
    fn csv_header() {
        let rows = vec![ComparisonRow {
            n: 6,
            lambda: 3,
            bound: 50,
            q: 47,
            scheme: SchemeLabel::Modified,
            trial_count: 10,
            mean_total_effort: 1234.5,
            mean_digit_mults: 0.1,
            mean_digit_adds: 3.0,
        }];
        let csv = rows_to_csv(&rows).unwrap();
        assert_eq!(
            csv.lines().next().unwrap(),
            "n,lambda,bound,q,scheme,trial_count,mean_total_effort,mean_digit_mults,mean_digit_adds"
        );
        assert_eq!(csv.lines().nth(1).unwrap(), "6,3,50,47,modified,10,1234.5,0.1,3.0");
    }

    #[test]
    fn fixture_topology_and_random_baseline_run() {
        let mut c = BenchPlan::reference_grid(3).experiments[0].clone();
        c.trials = 2;
        c.field_bounds = vec![50];
        c.topology = TopologySource::Fixture {
            topology: NetworkTopology::from_json(fixtures::EXAMPLE_TOPOLOGY_JSON).unwrap(),
        };
        c.baseline = Baseline::RandomMatrix;
        let rows = run_experiment(&c).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.mean_total_effort > 0.0));
    }

    #[test]
    fn plan_json() {
        let plan = BenchPlan::reference_grid(7);
        let back: BenchPlan = serde_json::from_str(&serde_json::to_string(&plan).unwrap()).unwrap();
        assert_eq!(back, plan);
        let minimal: BenchPlan = serde_json::from_str(
            r#"{"experiments":[{"n":6,"lambda":3,"field_bounds":[50],"trials":1,"rng_seed":1}]}"#,
        )
        .unwrap();
        assert_eq!(minimal.experiments[0].topology, TopologySource::default());
        assert_eq!(minimal.experiments[0].baseline, Baseline::Vandermonde);
    }

    #[test]
    fn trial_seeds_differ() {
        assert_ne!(trial_seed(1, 50, 0), trial_seed(1, 50, 1));
        assert_ne!(trial_seed(1, 50, 0), trial_seed(1, 100, 0));
        assert_eq!(trial_seed(9, 350, 4), trial_seed(9, 350, 4));
    }
}
