//! Blom symmetric-key pre-distribution for sensor networks.
//!
//! Two public-matrix constructions are provided: the classic Vandermonde form
//! ([`original`]) and an adjacency-matrix form where zeros become `q - 1`
//! ([`modified`]). [`security`] checks the column-independence condition behind
//! λ-security and mounts collusion attacks; [`cost`] counts digit-level arithmetic
//! to compare the two; [`bench`] runs the comparison grid and the six-node demo.
//!
//! The arithmetic is generic over the residue storage word (`u16`, `u32`, `u64`);
//! the aliases below fix it to `u64`, which is what the CLI uses.

pub mod bench;
pub mod cost;
pub mod error;
pub mod field;
pub mod fixtures;
pub mod matrix;
pub mod modified;
pub mod original;
pub mod security;

pub use error::{Error, Result};
pub use field::{largest_prime_leq, PrimeField, Residue};
pub use matrix::{columns_linearly_independent, FieldMatrix};
pub use modified::NetworkTopology;
pub use original::{SchemeKind, SecretSource};

pub type Field = PrimeField<u64>;
pub type Matrix = FieldMatrix<u64>;
pub type Params = original::SchemeParams<u64>;
pub type Public = original::PublicMatrix<u64>;
pub type Secret = original::SecretMatrix<u64>;
pub type Share = original::ShareMatrix<u64>;
pub type KeyMaterial = original::NodeKeyMaterial<u64>;
pub type Instance = original::SchemeInstance<u64>;
pub type Recovery = security::RecoveryResult<u64>;
