//! Exact computation and claim checking for iterated sum-of-divisors dynamics.
//!
//! The [`arith`] kernel supplies primality, budgeted factorization and the
//! multiplicative functions σ, σ_k, s, τ and S(n) = σ(n)/n. On top of it sit
//! σ-iteration and aliquot traces ([`iterate`]), divisibility and congruence
//! probes ([`congruence`]), the multiperfect search ([`multiperfect`]),
//! persistence ([`store`]) and the consolidated claim report ([`verify`]).

pub mod arith;
pub mod congruence;
pub mod error;
pub mod factorizer;
pub mod iterate;
pub mod multiperfect;
pub mod scan;
pub(crate) mod serde_dec;
pub mod store;
pub mod verify;

pub use arith::{Budget, ExactRatio, Factorization, PrimePower};
pub use error::{Error, Result};
pub use factorizer::Factorizer;
