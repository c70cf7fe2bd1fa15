use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Pow};
use serde::Serialize;

use crate::arith::primality::is_prime;
use crate::error::{Error, Result};
use crate::serde_dec;

/// A prime raised to a positive exponent.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct PrimePower {
    #[serde(with = "serde_dec")]
    pub prime: BigUint,
    pub exponent: u32,
}

impl PrimePower {
    pub fn new(prime: impl Into<BigUint>, exponent: u32) -> Self {
        PrimePower { prime: prime.into(), exponent }
    }

    pub fn value(&self) -> BigUint {
        Pow::pow(&self.prime, self.exponent)
    }
}

/// A positive integer together with its prime-power decomposition.
///
/// Parts are strictly increasing by prime and multiply back to `value`;
/// the value 1 has no parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Factorization {
    #[serde(with = "serde_dec")]
    value: BigUint,
    parts: Vec<PrimePower>,
}

impl Factorization {
    pub fn one() -> Self {
        Factorization { value: BigUint::one(), parts: Vec::new() }
    }

    /// Builds from parts that may arrive unsorted or with repeated primes.
    /// Every prime is certified.
    pub fn from_parts(parts: impl IntoIterator<Item = PrimePower>) -> Result<Self> {
        let parts: Vec<PrimePower> = parts.into_iter().collect();
        for part in &parts {
            if part.exponent == 0 {
                return Err(Error::InvalidFactorization(format!("zero exponent on {}", part.prime)));
            }
            if !is_prime(&part.prime) {
                return Err(Error::InvalidFactorization(format!("{} is not prime", part.prime)));
            }
        }
        Ok(Self::from_prime_parts(parts))
    }

    /// Validates a claimed factorization of `value`: parts strictly increasing,
    /// exponents positive, primes certified, and the product equal to `value`.
    pub fn checked(value: BigUint, parts: Vec<PrimePower>) -> Result<Self> {
        if parts.windows(2).any(|w| w[0].prime >= w[1].prime) {
            return Err(Error::InvalidFactorization("primes not strictly increasing".into()));
        }
        let candidate = Self::from_parts(parts)?;
        if candidate.value != value {
            return Err(Error::InvalidFactorization(format!("product {} does not equal {}", candidate.value, value)));
        }
        Ok(candidate)
    }

    /// Caller guarantees every prime is prime; sorts and merges repeats.
    pub(crate) fn from_prime_parts(mut parts: Vec<PrimePower>) -> Self {
        parts.sort_by(|a, b| a.prime.cmp(&b.prime));
        let mut merged: Vec<PrimePower> = Vec::with_capacity(parts.len());
        for part in parts {
            match merged.last_mut() {
                Some(last) if last.prime == part.prime => last.exponent += part.exponent,
                _ => merged.push(part),
            }
        }
        let value = merged.iter().fold(BigUint::one(), |acc, p| acc * p.value());
        Factorization { value, parts: merged }
    }

    pub fn value(&self) -> &BigUint {
        &self.value
    }

    pub fn parts(&self) -> &[PrimePower] {
        &self.parts
    }

    pub fn is_one(&self) -> bool {
        self.parts.is_empty()
    }

    /// Factorization of the product of two factored values.
    pub fn multiply(&self, other: &Factorization) -> Factorization {
        let mut parts = Vec::with_capacity(self.parts.len() + other.parts.len());
        let (mut i, mut j) = (0, 0);
        while i < self.parts.len() && j < other.parts.len() {
            let (a, b) = (&self.parts[i], &other.parts[j]);
            match a.prime.cmp(&b.prime) {
                std::cmp::Ordering::Less => {
                    parts.push(a.clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    parts.push(b.clone());
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    parts.push(PrimePower::new(a.prime.clone(), a.exponent + b.exponent));
                    i += 1;
                    j += 1;
                }
            }
        }
        parts.extend_from_slice(&self.parts[i..]);
        parts.extend_from_slice(&other.parts[j..]);
        Factorization { value: &self.value * &other.value, parts }
    }

    /// Exponent of `prime` in the value (0 when absent).
    pub fn exponent_of(&self, prime: &BigUint) -> u32 {
        self.parts.binary_search_by(|p| p.prime.cmp(prime)).map(|i| self.parts[i].exponent).unwrap_or(0)
    }
}

impl fmt::Display for Factorization {
    /// `2^2 * 3`, or `1` for the empty product.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parts.is_empty() {
            return write!(f, "1");
        }
        for (i, part) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, " * ")?;
            }
            if part.exponent == 1 {
                write!(f, "{}", part.prime)?;
            } else {
                write!(f, "{}^{}", part.prime, part.exponent)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_parts_sorts_and_merges() {
        let f =
            Factorization::from_parts([PrimePower::new(3u32, 1), PrimePower::new(2u32, 1), PrimePower::new(2u32, 1)])
                .unwrap();
        assert_eq!(f.value(), &BigUint::from(12u32));
        assert_eq!(f.parts(), &[PrimePower::new(2u32, 2), PrimePower::new(3u32, 1)]);
        assert_eq!(f.to_string(), "2^2 * 3");
    }

    #[test]
    fn checked_rejects_bad_claims() {
        let twelve = BigUint::from(12u32);
        assert!(
            Factorization::checked(twelve.clone(), vec![PrimePower::new(2u32, 2), PrimePower::new(3u32, 1)]).is_ok()
        );
        assert!(
            Factorization::checked(twelve.clone(), vec![PrimePower::new(3u32, 1), PrimePower::new(2u32, 2)]).is_err()
        );
        assert!(
            Factorization::checked(twelve.clone(), vec![PrimePower::new(2u32, 1), PrimePower::new(6u32, 1)]).is_err()
        );
        assert!(Factorization::checked(twelve, vec![PrimePower::new(2u32, 3)]).is_err());
        assert!(Factorization::checked(BigUint::one(), vec![]).is_ok());
    }

    #[test]
    fn multiply_merges() {
        let a = Factorization::from_parts([PrimePower::new(2u32, 2), PrimePower::new(7u32, 1)]).unwrap();
        let b = Factorization::from_parts([PrimePower::new(2u32, 1), PrimePower::new(3u32, 1)]).unwrap();
        let c = a.multiply(&b);
        assert_eq!(c.value(), &BigUint::from(168u32));
        assert_eq!(c.to_string(), "2^3 * 3 * 7");
        assert_eq!(c.exponent_of(&BigUint::from(2u32)), 3);
        assert_eq!(c.exponent_of(&BigUint::from(5u32)), 0);
    }
}
