//! Digit-level operation counting.
//!
//! Effort is measured in single-digit operations of schoolbook arithmetic:
//!
//! * multiplying a `da`-digit by a `db`-digit number costs `da·db` digit products and,
//!   when `db > 1`, `da·db − da` digit additions to accumulate the partial products;
//! * adding costs one digit addition per digit of the longer operand;
//! * reducing `a mod q` costs one long-division pass of `digits(a)·digits(q)`.
//!
//! The radix and per-counter weights live in [`CostModelSpec`].

use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Residue;
use crate::original::{pairwise_key, PublicKnowledge, SchemeInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostModelSpec {
    pub radix: u32,
    pub mult_weight: u64,
    pub add_weight: u64,
    pub reduction_weight: u64,
    /// Skip multiplications by 0 and 1 and charge multiplication by `q - 1` as a
    /// negation.
    pub shortcut: bool,
}

impl Default for CostModelSpec {
    fn default() -> Self {
        Self {
            radix: 10,
            mult_weight: 1,
            add_weight: 1,
            reduction_weight: 1,
            shortcut: false,
        }
    }
}

impl CostModelSpec {
    pub fn validate(&self) -> Result<()> {
        if self.radix < 2 {
            return Err(Error::Config(format!("radix {} must be at least 2", self.radix)));
        }
        Ok(())
    }

    fn weigh(&self, mut l: CostLedger) -> CostLedger {
        l.total_effort = self.mult_weight * l.digit_mults
            + self.add_weight * l.digit_adds
            + self.reduction_weight * l.reduction_ops;
        l
    }
}

/// Counters consumed by a computation. Ledgers merge by componentwise addition.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostLedger {
    pub digit_mults: u64,
    pub digit_adds: u64,
    pub reductions: u64,
    /// Digit operations spent inside reductions.
    pub reduction_ops: u64,
    pub total_effort: u64,
}

impl Add for CostLedger {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self {
            digit_mults: self.digit_mults + o.digit_mults,
            digit_adds: self.digit_adds + o.digit_adds,
            reductions: self.reductions + o.reductions,
            reduction_ops: self.reduction_ops + o.reduction_ops,
            total_effort: self.total_effort + o.total_effort,
        }
    }
}

impl AddAssign for CostLedger {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl std::iter::Sum for CostLedger {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::default(), Add::add)
    }
}

/// Number of base-`radix` digits; `digits(0) == 1`.
pub fn digits(n: u128, radix: u32) -> u64 {
    let radix = radix as u128;
    let mut n = n / radix;
    let mut d = 1;
    while n > 0 {
        n /= radix;
        d += 1;
    }
    d
}

pub fn cost_of_mul(a: u128, b: u128, spec: &CostModelSpec) -> CostLedger {
    let (da, db) = (digits(a, spec.radix), digits(b, spec.radix));
    spec.weigh(CostLedger {
        digit_mults: da * db,
        digit_adds: if db > 1 { da * db - da } else { 0 },
        ..Default::default()
    })
}

pub fn cost_of_add(a: u128, b: u128, spec: &CostModelSpec) -> CostLedger {
    spec.weigh(CostLedger {
        digit_adds: digits(a, spec.radix).max(digits(b, spec.radix)),
        ..Default::default()
    })
}

pub fn cost_of_reduction(a: u128, q: u128, spec: &CostModelSpec) -> CostLedger {
    spec.weigh(CostLedger {
        reductions: 1,
        reduction_ops: digits(a, spec.radix) * digits(q, spec.radix),
        ..Default::default()
    })
}

/// Exact integer arithmetic that charges every operation to a ledger.
#[derive(Debug, Clone)]
pub struct Meter {
    spec: CostModelSpec,
    q: u128,
    ledger: CostLedger,
}

impl Meter {
    pub fn new(spec: CostModelSpec, q: u128) -> Self {
        Self {
            spec,
            q,
            ledger: CostLedger::default(),
        }
    }

    pub fn ledger(&self) -> CostLedger {
        self.ledger
    }

    pub fn take(&mut self) -> CostLedger {
        std::mem::take(&mut self.ledger)
    }

    pub fn mul(&mut self, a: u128, b: u128) -> u128 {
        let delta = if self.spec.shortcut {
            self.shortcut_mul_cost(a, b)
        } else {
            cost_of_mul(a, b, &self.spec)
        };
        self.ledger += delta;
        a * b
    }

    fn shortcut_mul_cost(&self, a: u128, b: u128) -> CostLedger {
        if a <= 1 || b <= 1 {
            CostLedger::default()
        } else if a == self.q - 1 {
            self.negation_cost(b)
        } else if b == self.q - 1 {
            self.negation_cost(a)
        } else {
            cost_of_mul(a, b, &self.spec)
        }
    }

    // q - x
    fn negation_cost(&self, x: u128) -> CostLedger {
        cost_of_add(self.q, x, &self.spec)
    }

    pub fn add(&mut self, a: u128, b: u128) -> u128 {
        self.ledger += cost_of_add(a, b, &self.spec);
        a + b
    }

    pub fn reduce(&mut self, a: u128) -> u128 {
        self.ledger += cost_of_reduction(a, self.q, &self.spec);
        a % self.q
    }

    /// Dot product with one reduction at the end.
    pub fn dot_reduced(&mut self, row: &[u128], col: &[u128]) -> u128 {
        let raw = row
            .iter()
            .zip(col)
            .map(|(&a, &b)| self.mul(a, b))
            .collect::<Vec<_>>()
            .into_iter()
            .reduce(|acc, p| self.add(acc, p))
            .unwrap_or(0);
        self.reduce(raw)
    }

    /// `[1, seed, …, seed^λ]` with the first two entries free and each further power
    /// one multiplication and one reduction.
    pub fn seed_column(&mut self, seed: u128, lambda: usize) -> Vec<u128> {
        let mut col = vec![1];
        if lambda >= 1 {
            col.push(seed % self.q);
        }
        for _ in 2..=lambda {
            let prev = *col.last().expect("column is nonempty");
            let p = self.mul(prev, seed);
            col.push(self.reduce(p));
        }
        col
    }
}

/// A key derivation by node `i` for peer `j`, with its cost split by phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeasuredAgreement<T> {
    pub key: T,
    /// Cost of obtaining `j`'s public column.
    pub column: CostLedger,
    /// Cost of the dot product and its final reduction.
    pub dot: CostLedger,
    pub ledger: CostLedger,
}

/// Node `i` derives `K_ij` under the cost model.
pub fn measured_key_agreement<T: Residue>(
    instance: &SchemeInstance<T>,
    i: usize,
    j: usize,
    spec: &CostModelSpec,
) -> Result<MeasuredAgreement<T>> {
    if i == j {
        return Err(Error::SameNode(i));
    }
    let own = instance.node(i)?;
    let peer = instance.node(j)?;
    let field = instance.field();
    let mut meter = Meter::new(*spec, field.modulus().wide());

    let column: Vec<u128> = match &peer.public {
        PublicKnowledge::Vandermonde { public_seed } => {
            meter.seed_column(public_seed.wide(), peer.lambda)
        }
        // read from topology or storage, no arithmetic
        _ => peer.public_column()?.iter().map(|v| v.wide()).collect(),
    };
    let column_cost = meter.take();

    let row: Vec<u128> = own.private_row.iter().map(|v| v.wide()).collect();
    if row.len() != column.len() {
        return Err(Error::LengthMismatch(row.len(), column.len()));
    }
    let key = T::narrow(meter.dot_reduced(&row, &column));
    let dot_cost = meter.take();

    debug_assert_eq!(
        key,
        pairwise_key(&own.private_row, &peer.public_column()?, field)?.key
    );
    Ok(MeasuredAgreement {
        key,
        column: column_cost,
        dot: dot_cost,
        ledger: column_cost + dot_cost,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PrimeField;
    use crate::fixtures::*;
    use crate::matrix::FieldMatrix;
    use crate::modified::{setup_modified_scheme, NetworkTopology};
    use crate::original::{
        setup_original_scheme, SchemeParams, SecretMatrix, SecretSource,
    };

    fn spec() -> CostModelSpec {
        CostModelSpec::default()
    }

    fn example_instance() -> SchemeInstance<u64> {
        let f = PrimeField::new(29).unwrap();
        let d = SecretMatrix::new(FieldMatrix::from_rows(&EXAMPLE_SECRET, &f).unwrap()).unwrap();
        let t = NetworkTopology::new(6, EXAMPLE_EDGES).unwrap();
        setup_modified_scheme(&t, 3, &f, SecretSource::Injected(d)).unwrap()
    }

    #[test]
    fn digit_counts() {
        assert_eq!(digits(0, 10), 1);
        assert_eq!(digits(808, 10), 3);
        assert_eq!(digits(28, 10), 2);
        assert_eq!(digits(9, 10), 1);
        assert_eq!(digits(10, 10), 2);
        assert_eq!(digits(255, 2), 8);
    }

    #[test]
    fn mul_costs() {
        let c = cost_of_mul(7, 8, &spec());
        assert_eq!((c.digit_mults, c.digit_adds), (1, 0));
        let c = cost_of_mul(28, 28, &spec());
        assert_eq!((c.digit_mults, c.digit_adds), (4, 2));
        let c = cost_of_mul(3, 28, &spec());
        assert_eq!((c.digit_mults, c.digit_adds), (2, 1));
        assert_eq!(c.total_effort, 3);
    }

    #[test]
    fn add_costs() {
        assert_eq!(cost_of_add(0, 0, &spec()).digit_adds, 1);
        assert_eq!(cost_of_add(808, 406, &spec()).digit_adds, 3);
        assert_eq!(cost_of_add(9, 1214, &spec()).digit_adds, 4);
    }

    #[test]
    fn reduction_costs() {
        let c = cost_of_reduction(808, 29, &spec());
        assert_eq!((c.reductions, c.reduction_ops, c.total_effort), (1, 6, 6));
        assert_eq!(cost_of_reduction(25, 29, &spec()).reduction_ops, 4);
        assert_eq!(cost_of_reduction(0, 29, &spec()).reduction_ops, 2);
    }

    #[test]
    fn weights_apply() {
        let s = CostModelSpec {
            mult_weight: 3,
            add_weight: 2,
            reduction_weight: 5,
            ..spec()
        };
        assert_eq!(cost_of_mul(28, 28, &s).total_effort, 4 * 3 + 2 * 2);
        assert_eq!(cost_of_reduction(808, 29, &s).total_effort, 30);
        assert!(CostModelSpec { radix: 1, ..spec() }.validate().is_err());
    }

    #[test]
    fn example_pair_2_5() {
        let inst = example_instance();
        let m = measured_key_agreement(&inst, 2, 5, &spec()).unwrap();
        assert_eq!(m.key, 25);
        assert_eq!(m.column, CostLedger::default());
        // products of [3,20,24,5]·[28,28,1,28]: 84, 560, 24, 140
        let mut expected = cost_of_mul(3, 28, &spec())
            + cost_of_mul(20, 28, &spec())
            + cost_of_mul(24, 1, &spec())
            + cost_of_mul(5, 28, &spec());
        expected += cost_of_add(84, 560, &spec());
        expected += cost_of_add(644, 24, &spec());
        expected += cost_of_add(668, 140, &spec());
        expected += cost_of_reduction(808, 29, &spec());
        assert_eq!(m.dot, expected);
        assert_eq!(m.dot.reductions, 1);
        assert_eq!(m.dot.reduction_ops, 6);
        assert_eq!(m.dot.digit_mults, 2 + 4 + 2 + 2);
        assert_eq!(m.dot.digit_adds, (1 + 2 + 1) + 3 + 3 + 3);
    }

    #[test]
    fn example_pair_5_2_and_determinism() {
        let inst = example_instance();
        let a = measured_key_agreement(&inst, 5, 2, &spec()).unwrap();
        let b = measured_key_agreement(&inst, 2, 5, &spec()).unwrap();
        assert_eq!(a.key, 25);
        assert_eq!(a.key, b.key);
        assert_eq!(a, measured_key_agreement(&inst, 5, 2, &spec()).unwrap());
        assert_eq!(measured_key_agreement(&inst, 2, 2, &spec()), Err(Error::SameNode(2)));
    }

    #[test]
    fn vandermonde_column_cost() {
        let p = SchemeParams::new(PrimeField::<u64>::new(47).unwrap(), 6, 3).unwrap();
        let inst = setup_original_scheme(p, SecretSource::Seeded(9)).unwrap();
        let m = measured_key_agreement(&inst, 1, 4, &spec()).unwrap();
        // λ − 1 = 2 seed multiplications, each reduced
        assert_eq!(m.column.reductions, 2);
        assert!(m.column.digit_mults >= 2);
        assert_eq!(m.key, inst.key(1, 4).unwrap());
    }

    #[test]
    fn shortcut_mode_skips_trivial_products() {
        let mut meter = Meter::new(CostModelSpec { shortcut: true, ..spec() }, 29);
        assert_eq!(meter.mul(1, 17), 17);
        assert_eq!(meter.mul(0, 17), 0);
        assert_eq!(meter.ledger(), CostLedger::default());
        assert_eq!(meter.mul(28, 5), 140);
        assert_eq!(meter.ledger().digit_mults, 0);
        assert_eq!(meter.ledger().digit_adds, 2);
    }

    #[test]
    fn spec_json() {
        let s: CostModelSpec = serde_json::from_str(r#"{"radix": 2, "shortcut": true}"#).unwrap();
        assert_eq!(s.radix, 2);
        assert_eq!(s.mult_weight, 1);
        let back: CostModelSpec = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
    }
}
