//! λ-security checks and collusion attacks.
//!
//! A scheme is λ-secure when every `λ + 1` columns of `G` are linearly independent.
//! [`check_lambda_secure`] searches for a dependent subset. [`recover_secret_matrix`]
//! solves for `D` from compromised rows, and [`predict_foreign_key`] turns either a
//! recovered `D` or a column dependence into keys the attacker should not know.

use std::collections::{BTreeMap, HashSet};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{PrimeField, Residue};
use crate::matrix::{dot_raw, FieldMatrix};
use crate::original::{check_node, NodeKeyMaterial, PublicMatrix, SecretMatrix};

/// Seed for subset sampling when the caller does not pick one.
pub const DEFAULT_SAMPLE_SEED: u64 = 0x5eed_b10f;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SecurityReport {
    pub checked_subsets: u64,
    pub independent: bool,
    /// 1-based column ids of a dependent `(λ+1)`-subset.
    pub witness: Option<Vec<usize>>,
    pub exhaustive: bool,
}

/// `n choose k`, saturating.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| {
        acc.saturating_mul((n - i) as u128) / (i as u128 + 1)
    })
}

/// Lexicographic `k`-subsets of `0..n`.
pub(crate) struct Combinations {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Combinations {
    pub(crate) fn new(n: usize, k: usize) -> Self {
        Self {
            n,
            current: (k <= n).then(|| (0..k).collect()),
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let k = out.len();
        let mut next = out.clone();
        let mut i = k;
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            if next[i] < self.n - k + i {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                self.current = Some(next);
                break;
            }
        }
        Some(out)
    }
}

pub fn check_lambda_secure<T: Residue>(
    g: &PublicMatrix<T>,
    lambda: usize,
    field: &PrimeField<T>,
    subset_limit: u64,
) -> SecurityReport {
    check_lambda_secure_seeded(g, lambda, field, subset_limit, DEFAULT_SAMPLE_SEED)
}

/// Exhaustive when `C(N, λ+1) ≤ subset_limit`, otherwise checks `subset_limit` distinct
/// subsets drawn uniformly from a seeded stream.
pub fn check_lambda_secure_seeded<T: Residue>(
    g: &PublicMatrix<T>,
    lambda: usize,
    field: &PrimeField<T>,
    subset_limit: u64,
    seed: u64,
) -> SecurityReport {
    let n = g.node_count();
    let k = lambda + 1;
    let total = binomial(n, k);
    let exhaustive = total <= subset_limit as u128;

    let mut checked = 0u64;
    let mut test = |cols: Vec<usize>| -> Option<Vec<usize>> {
        checked += 1;
        let sub = g.matrix.select_columns(&cols).expect("subset indices are in range");
        (sub.rank(field) < k).then(|| cols.iter().map(|c| c + 1).collect())
    };

    let witness = if exhaustive {
        Combinations::new(n, k).find_map(&mut test)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut seen = HashSet::new();
        let mut found = None;
        while (seen.len() as u64) < subset_limit {
            let mut cols = sample(&mut rng, n, k).into_vec();
            cols.sort_unstable();
            if seen.insert(cols.clone()) {
                if let Some(w) = test(cols) {
                    found = Some(w);
                    break;
                }
            }
        }
        found
    };

    SecurityReport {
        checked_subsets: checked,
        independent: witness.is_none(),
        witness,
        exhaustive,
    }
}

/// `c_target = Σ coefficient · c_m` over the listed 1-based columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ColumnDependence<T: Residue> {
    pub target: usize,
    pub terms: Vec<(usize, T)>,
}

/// Expresses the first non-pivot column of the given 1-based columns in terms of the
/// pivot columns. `None` when the columns are independent.
pub fn find_column_dependence<T: Residue>(
    g: &PublicMatrix<T>,
    columns: &[usize],
    field: &PrimeField<T>,
) -> Result<Option<ColumnDependence<T>>> {
    let zero_based = columns
        .iter()
        .map(|&c| check_node(c, g.node_count()).map(|_| c - 1))
        .collect::<Result<Vec<_>>>()?;
    let sub = g.matrix.select_columns(&zero_based)?;
    let (rref, pivots) = sub.row_echelon(field);
    let Some(free) = (0..columns.len()).find(|c| !pivots.contains(c)) else {
        return Ok(None);
    };
    let terms = pivots
        .iter()
        .enumerate()
        .filter(|&(r, &p)| p < free && rref.get(r, free) != T::zero())
        .map(|(r, &p)| (columns[p], rref.get(r, free)))
        .collect();
    Ok(Some(ColumnDependence {
        target: columns[free],
        terms,
    }))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct RecoveryResult<T: Residue> {
    pub recovered: Option<SecretMatrix<T>>,
    pub solution_space_dim: usize,
}

// position of D[a][b] (a ≤ b) among the upper-triangle unknowns
fn unknown_index(a: usize, b: usize, w: usize) -> usize {
    let (a, b) = (a.min(b), a.max(b));
    a * w - a * (a + 1) / 2 + b
}

/// Solves for the upper triangle of `D` from compromised `(node_id, private_row)` pairs.
pub fn recover_secret_matrix<T: Residue>(
    compromised: &[(usize, Vec<T>)],
    g: &PublicMatrix<T>,
    field: &PrimeField<T>,
) -> Result<RecoveryResult<T>> {
    if compromised.is_empty() {
        return Err(Error::InvalidParams("no compromised nodes".into()));
    }
    let w = g.matrix.rows();
    let unknowns = w * (w + 1) / 2;

    // A_k[a] = Σ_b D[a][b] · G[b][k]
    let mut system = Vec::with_capacity(compromised.len() * w);
    for (node, row) in compromised {
        check_node(*node, g.node_count())?;
        if row.len() != w {
            return Err(Error::LengthMismatch(row.len(), w));
        }
        let col = g.matrix.column(node - 1);
        for (a, &value) in row.iter().enumerate() {
            let mut eq = vec![T::zero(); unknowns + 1];
            for (b, &gb) in col.iter().enumerate() {
                let idx = unknown_index(a, b, w);
                eq[idx] = field.add(eq[idx], gb);
            }
            eq[unknowns] = field.reduce(value.wide());
            system.push(eq);
        }
    }
    let aug = FieldMatrix::from_rows(&system, field)?;
    let (rref, pivots) = aug.row_echelon(field);
    if pivots.last() == Some(&unknowns) {
        return Err(Error::InconsistentSystem);
    }
    let dim = unknowns - pivots.len();
    if dim > 0 {
        return Ok(RecoveryResult {
            recovered: None,
            solution_space_dim: dim,
        });
    }

    let mut solution = vec![T::zero(); unknowns];
    for (r, &p) in pivots.iter().enumerate() {
        solution[p] = rref.get(r, unknowns);
    }
    let d = FieldMatrix::from_fn(w, w, |a, b| solution[unknown_index(a, b, w)]);
    let d = SecretMatrix::new(d)?;

    let reproduced = d.matrix().mul(&g.matrix, field)?.transpose();
    for (node, row) in compromised {
        if reproduced.row(node - 1) != row.as_slice() {
            return Err(Error::InconsistentSystem);
        }
    }
    Ok(RecoveryResult {
        recovered: Some(d),
        solution_space_dim: 0,
    })
}

/// What the attacker holds.
#[derive(Debug, Clone, Copy)]
pub enum AttackKnowledge<'a, T: Residue> {
    Recovered(&'a RecoveryResult<T>),
    /// A column dependence plus keys `K_{i,m}` the attacker already knows, keyed by `m`.
    Dependence {
        dependence: &'a ColumnDependence<T>,
        known_keys: &'a BTreeMap<usize, T>,
    },
    Nothing,
}

/// Predicts `K_ij` from the attacker's knowledge, if it suffices.
pub fn predict_foreign_key<T: Residue>(
    knowledge: AttackKnowledge<'_, T>,
    g: &PublicMatrix<T>,
    i: usize,
    j: usize,
    field: &PrimeField<T>,
) -> Option<T> {
    match knowledge {
        AttackKnowledge::Recovered(result) => {
            let d = result.recovered.as_ref()?;
            let col_i = g.column(i).ok()?;
            let col_j = g.column(j).ok()?;
            // row i of A is D·G_i
            let row_i = (0..d.dim())
                .map(|a| dot_raw(d.matrix().row(a), &col_i).map(|v| field.reduce(v)))
                .collect::<Result<Vec<T>>>()
                .ok()?;
            Some(field.reduce(dot_raw(&row_i, &col_j).ok()?))
        }
        AttackKnowledge::Dependence {
            dependence,
            known_keys,
        } => {
            if dependence.target != j {
                return None;
            }
            dependence.terms.iter().try_fold(T::zero(), |acc, &(m, alpha)| {
                let k = *known_keys.get(&m)?;
                Some(field.add(acc, field.mul(alpha, k)))
            })
        }
        AttackKnowledge::Nothing => None,
    }
}

/// Reassembles `G` from the public parts of a full set of node material (ids `1..=N`).
pub fn public_matrix_from_material<T: Residue>(
    nodes: &[NodeKeyMaterial<T>],
) -> Result<(PublicMatrix<T>, PrimeField<T>)> {
    let first = nodes.first().ok_or(Error::InvalidParams("no key material".into()))?;
    let (field, lambda) = (first.field, first.lambda);
    let mut by_id = BTreeMap::new();
    for m in nodes {
        if m.field != field || m.lambda != lambda {
            return Err(Error::MaterialMismatch(format!(
                "node {} has q={}, lambda={}; expected q={}, lambda={}",
                m.node_id,
                m.field.modulus(),
                m.lambda,
                field.modulus(),
                lambda
            )));
        }
        by_id.insert(m.node_id, m);
    }
    let n = by_id.len();
    if by_id.keys().copied().ne(1..=n) {
        return Err(Error::MaterialMismatch("node ids must be exactly 1..=N".into()));
    }
    let columns = by_id
        .values()
        .map(|m| m.public_column())
        .collect::<Result<Vec<_>>>()?;
    let matrix = FieldMatrix::from_fn(lambda + 1, n, |r, c| columns[c][r]);
    Ok((
        PublicMatrix {
            matrix,
            generator: None,
        },
        field,
    ))
}

/// Runs [`recover_secret_matrix`] on the listed nodes of a material set.
pub fn collude<T: Residue>(
    nodes: &[NodeKeyMaterial<T>],
    compromise: &[usize],
) -> Result<RecoveryResult<T>> {
    let (g, field) = public_matrix_from_material(nodes)?;
    let rows = compromise
        .iter()
        .map(|&id| {
            nodes
                .iter()
                .find(|m| m.node_id == id)
                .map(|m| (id, m.private_row.clone()))
                .ok_or(Error::Unprovisioned(id))
        })
        .collect::<Result<Vec<_>>>()?;
    recover_secret_matrix(&rows, &g, &field)
}
