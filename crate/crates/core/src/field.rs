//! Prime-field arithmetic over GF(q).
//!
//! Residues are stored in any unsigned machine word implementing [`Residue`]. Every
//! product and sum is formed in `u128` and reduced once, so a `u64` residue never
//! overflows for the moduli accepted here (q ≤ 2^31).

use std::fmt::{Debug, Display};
use std::hash::Hash;

use num_traits::{PrimInt, Unsigned};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest modulus accepted by [`PrimeField::new`].
pub const MAX_MODULUS: u128 = 1 << 31;

/// Unsigned storage word for field residues.
pub trait Residue:
    PrimInt
    + Unsigned
    + Hash
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    #[inline]
    fn wide(self) -> u128 {
        // PrimInt unsigned types always fit in u128.
        self.to_u128().unwrap_or_default()
    }

    /// Narrows a value already known to fit in `Self`.
    #[inline]
    fn narrow(w: u128) -> Self {
        <Self as num_traits::NumCast>::from(w).expect("residue exceeds storage word")
    }
}

impl Residue for u16 {}
impl Residue for u32 {}
impl Residue for u64 {}

/// The field of integers modulo a prime `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(bound = "", try_from = "u64", into = "u64")]
pub struct PrimeField<T: Residue> {
    q: T,
}

impl<T: Residue> PrimeField<T> {
    pub fn new(q: T) -> Result<Self> {
        let wide = q.wide();
        if wide <= 2 {
            return Err(Error::ModulusTooSmall(wide));
        }
        let max = MAX_MODULUS.min(T::max_value().wide());
        if wide > max {
            return Err(Error::ModulusTooLarge { q: wide, max });
        }
        if !is_prime(wide as u64) {
            return Err(Error::NotPrime(wide));
        }
        Ok(Self { q })
    }

    #[inline]
    pub fn modulus(&self) -> T {
        self.q
    }

    /// `q - 1`, the residue standing in for "not a neighbour" in adjacency-derived
    /// public matrices.
    #[inline]
    pub fn minus_one(&self) -> T {
        self.q - T::one()
    }

    /// Converts any integer into its canonical residue.
    pub fn element(&self, value: u128) -> T {
        T::narrow(value % self.q.wide())
    }

    #[inline]
    pub fn is_reduced(&self, a: T) -> bool {
        a < self.q
    }

    /// Reduces a wide accumulator.
    #[inline]
    pub fn reduce(&self, wide: u128) -> T {
        T::narrow(wide % self.q.wide())
    }

    #[inline]
    pub fn add(&self, a: T, b: T) -> T {
        self.reduce(a.wide() + b.wide())
    }

    #[inline]
    pub fn sub(&self, a: T, b: T) -> T {
        let q = self.q.wide();
        self.reduce(a.wide() + q - b.wide() % q)
    }

    #[inline]
    pub fn neg(&self, a: T) -> T {
        self.sub(T::zero(), a)
    }

    #[inline]
    pub fn mul(&self, a: T, b: T) -> T {
        self.reduce(a.wide() * b.wide())
    }

    /// Square-and-multiply exponentiation; `pow(x, 0) == 1`.
    pub fn pow(&self, base: T, mut exp: u64) -> T {
        let q = self.q.wide();
        let mut acc = 1u128 % q;
        let mut b = base.wide() % q;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * b % q;
            }
            b = b * b % q;
            exp >>= 1;
        }
        T::narrow(acc)
    }

    /// Multiplicative inverse by the extended Euclidean algorithm. `None` for zero.
    pub fn inv(&self, a: T) -> Option<T> {
        let q = self.q.wide() as i128;
        let a = a.wide() as i128 % q;
        if a == 0 {
            return None;
        }
        let (mut r0, mut r1) = (q, a);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let quot = r0 / r1;
            (r0, r1) = (r1, r0 - quot * r1);
            (t0, t1) = (t1, t0 - quot * t1);
        }
        debug_assert_eq!(r0, 1);
        Some(T::narrow(t0.rem_euclid(q) as u128))
    }

    /// Smallest `g ≥ 2` whose multiplicative order is `q - 1`.
    pub fn primitive_element(&self) -> T {
        let q = self.q.wide() as u64;
        let order = q - 1;
        let factors = prime_factors(order);
        (2..q)
            .map(|g| T::narrow(g as u128))
            .find(|&g| factors.iter().all(|&p| self.pow(g, order / p) != T::one()))
            .expect("every prime field has a generator")
    }
}

impl<T: Residue> TryFrom<u64> for PrimeField<T> {
    type Error = Error;

    fn try_from(q: u64) -> Result<Self> {
        let narrowed = <T as num_traits::NumCast>::from(q).ok_or(Error::ModulusTooLarge {
            q: q as u128,
            max: MAX_MODULUS.min(T::max_value().wide()),
        })?;
        Self::new(narrowed)
    }
}

impl<T: Residue> From<PrimeField<T>> for u64 {
    fn from(f: PrimeField<T>) -> u64 {
        f.q.wide() as u64
    }
}

/// Trial-division primality test.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) {
        return false;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Largest prime `p ≤ bound`, or `None` when `bound < 2`.
pub fn largest_prime_leq(bound: u64) -> Option<u64> {
    (2..=bound).rev().find(|&p| is_prime(p))
}

/// Distinct prime factors in increasing order.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f29() -> PrimeField<u64> {
        PrimeField::new(29).unwrap()
    }

    #[test]
    fn add_examples() {
        let f = f29();
        assert_eq!(f.add(0, 7), 7);
        assert_eq!(f.add(28, 1), 0);
        assert_eq!(f.add(20, 24), 44 % 29);
        assert_eq!(f.add(20, 24), 15);
    }

    #[test]
    fn mul_examples() {
        let f = f29();
        assert_eq!(f.mul(1, 17), 17);
        assert_eq!(f.mul(28, 28), 1);
        assert_eq!(f.mul(20, 28), 560 % 29);
        assert_eq!(f.mul(20, 28), 9);
    }

    #[test]
    fn pow_examples() {
        let f = f29();
        assert_eq!(f.pow(5, 0), 1);
        // repeated multiplication
        let mut acc = 1u64;
        for _ in 0..14 {
            acc = acc * 2 % 29;
        }
        assert_eq!(acc, 28);
        assert_eq!(f.pow(2, 14), 28);
        assert_eq!(f.pow(2, 28), 1);
    }

    #[test]
    fn largest_prime_examples() {
        assert_eq!(largest_prime_leq(50), Some(47));
        assert_eq!(largest_prime_leq(29), Some(29));
        assert_eq!(largest_prime_leq(1), None);
        assert_eq!(largest_prime_leq(2), Some(2));
        let grid: Vec<_> = [50, 100, 150, 200, 250, 300, 350]
            .iter()
            .map(|&b| largest_prime_leq(b).unwrap())
            .collect();
        assert_eq!(grid, vec![47, 97, 149, 199, 241, 293, 349]);
    }

    #[test]
    fn primitive_element_examples() {
        assert_eq!(f29().primitive_element(), 2);
        assert_eq!(PrimeField::<u64>::new(3).unwrap().primitive_element(), 2);
        // 2 has order 3 mod 7
        assert_eq!(PrimeField::<u64>::new(7).unwrap().primitive_element(), 3);
    }

    #[test]
    fn rejects_bad_moduli() {
        assert_eq!(PrimeField::<u64>::new(2), Err(Error::ModulusTooSmall(2)));
        assert_eq!(PrimeField::<u64>::new(21), Err(Error::NotPrime(21)));
        assert!(matches!(
            PrimeField::<u64>::new((1 << 31) + 11),
            Err(Error::ModulusTooLarge { .. })
        ));
    }

    #[test]
    fn inverse_roundtrip() {
        let f = f29();
        assert_eq!(f.inv(0), None);
        for a in 1..29 {
            assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
        }
    }

    #[test]
    fn narrow_word_works() {
        let f = PrimeField::<u16>::new(65521).unwrap();
        assert_eq!(f.mul(65520, 65520), 1);
        assert_eq!(f.add(65520, 65520), 65519);
    }

    #[test]
    fn serde_as_bare_modulus() {
        let f = f29();
        assert_eq!(serde_json::to_string(&f).unwrap(), "29");
        let back: PrimeField<u64> = serde_json::from_str("29").unwrap();
        assert_eq!(back, f);
        assert!(serde_json::from_str::<PrimeField<u64>>("30").is_err());
    }
}
