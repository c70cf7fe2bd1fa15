//! Multiplicative functions evaluated from a factorization.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Pow};

use crate::arith::factorization::{Factorization, PrimePower};
use crate::arith::ratio::ExactRatio;
use crate::error::{Error, Result};

/// σ(p^e) = 1 + p + ... + p^e.
pub fn sigma_prime_power(part: &PrimePower) -> BigUint {
    let p = &part.prime;
    (Pow::pow(p, part.exponent + 1) - 1u32) / (p - 1u32)
}

/// σ_k(p^e) = Σ_{i=0..e} p^{ik}.
pub fn sigma_pow_prime_power(part: &PrimePower, k: u32) -> BigUint {
    if k == 0 {
        return BigUint::from(part.exponent + 1);
    }
    let pk: BigUint = Pow::pow(&part.prime, k);
    (Pow::pow(&pk, part.exponent + 1) - 1u32) / (pk - 1u32)
}

/// Sum of divisors.
pub fn sigma(f: &Factorization) -> BigUint {
    f.parts().iter().fold(BigUint::one(), |acc, p| acc * sigma_prime_power(p))
}

/// Sum of k-th powers of divisors; k = 0 gives the divisor count.
pub fn sigma_pow(f: &Factorization, k: u32) -> BigUint {
    f.parts().iter().fold(BigUint::one(), |acc, p| acc * sigma_pow_prime_power(p, k))
}

/// s(n) = σ(n) − n.
pub fn aliquot(f: &Factorization) -> BigUint {
    sigma(f) - f.value()
}

/// τ(n).
pub fn tau(f: &Factorization) -> BigUint {
    sigma_pow(f, 0)
}

/// ω(n), the number of distinct primes.
pub fn omega(f: &Factorization) -> usize {
    f.parts().len()
}

pub fn is_squarefree(f: &Factorization) -> bool {
    f.parts().iter().all(|p| p.exponent == 1)
}

/// S(n) = σ(n)/n in lowest terms.
pub fn abundancy(f: &Factorization) -> ExactRatio {
    ExactRatio::new(sigma(f), f.value().clone())
}

/// lcm of (exponent + 1) over the parts; 1 for the empty factorization.
pub fn l_invariant(f: &Factorization) -> BigUint {
    f.parts().iter().fold(BigUint::one(), |acc, p| acc.lcm(&BigUint::from(p.exponent + 1)))
}

/// Products over the distinct primes q | n of (q+1)/q and q/(q−1).
///
/// `lower <= S(n) < upper`, with equality on the left exactly when n is
/// squarefree.
pub fn abundancy_bounds(f: &Factorization) -> Result<(ExactRatio, ExactRatio)> {
    if f.is_one() {
        return Err(Error::PreconditionViolated("abundancy bounds need n >= 2".into()));
    }
    let mut lower = ExactRatio::one();
    let mut upper = ExactRatio::one();
    for part in f.parts() {
        let q = &part.prime;
        lower = lower * ExactRatio::new(q + 1u32, q.clone());
        upper = upper * ExactRatio::new(q.clone(), q - 1u32);
    }
    Ok((lower, upper))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::factor::factor_u64;

    fn f(n: u64) -> Factorization {
        factor_u64(n)
    }

    fn r(a: u32, b: u32) -> ExactRatio {
        ExactRatio::new(a, b)
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(sigma(&f(1)), BigUint::from(1u32));
        assert_eq!(sigma(&f(6)), BigUint::from(12u32));
        assert_eq!(sigma_pow(&f(6), 0), BigUint::from(4u32));
        assert_eq!(sigma_pow(&f(6), 1), BigUint::from(12u32));
        assert_eq!(sigma_pow(&f(6), 2), BigUint::from(50u32));
        assert_eq!(sigma_pow(&f(6), 3), BigUint::from(252u32));
        assert_eq!(sigma_pow(&f(4), 2), BigUint::from(21u32));
    }

    #[test]
    fn aliquot_examples() {
        assert_eq!(aliquot(&f(1)), BigUint::from(0u32));
        assert_eq!(aliquot(&f(6)), BigUint::from(6u32));
        assert_eq!(aliquot(&f(12)), BigUint::from(16u32));
    }

    #[test]
    fn abundancy_examples() {
        assert_eq!(abundancy(&f(1)), r(1, 1));
        assert_eq!(abundancy(&f(6)), r(2, 1));
        assert_eq!(abundancy(&f(12)), r(7, 3));
    }

    #[test]
    fn l_invariant_examples() {
        assert_eq!(l_invariant(&f(6)), BigUint::from(2u32));
        assert_eq!(l_invariant(&f(28)), BigUint::from(6u32));
        assert_eq!(l_invariant(&f(1)), BigUint::from(1u32));
    }

    #[test]
    fn bounds_examples() {
        assert_eq!(abundancy_bounds(&f(6)).unwrap(), (r(2, 1), r(3, 1)));
        let (lo, hi) = abundancy_bounds(&f(12)).unwrap();
        assert_eq!((lo.clone(), hi.clone()), (r(2, 1), r(3, 1)));
        assert!(lo < r(7, 3) && r(7, 3) < hi);
        assert_eq!(abundancy_bounds(&f(13)).unwrap(), (r(14, 13), r(13, 12)));
        assert_eq!(abundancy(&f(13)), r(14, 13));
        assert!(abundancy_bounds(&f(1)).is_err());
    }
}
