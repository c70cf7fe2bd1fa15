//! Strong-pseudoprime (Miller-Rabin) primality testing.
//!
//! Below 3317044064679887385961981 (about 3.3e24) the thirteen prime bases
//! 2..=41 make the test deterministic. Above that bound the test runs 64
//! rounds with the first 64 primes as bases, which keeps results reproducible
//! from run to run.

use std::sync::OnceLock;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

const DETERMINISTIC_BASES: [u64; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];
const PROBABILISTIC_ROUNDS: usize = 64;

fn deterministic_limit() -> &'static BigUint {
    static LIMIT: OnceLock<BigUint> = OnceLock::new();
    LIMIT.get_or_init(|| "3317044064679887385961981".parse().expect("literal"))
}

fn first_primes(count: usize) -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    let all = PRIMES.get_or_init(|| {
        let mut out = Vec::with_capacity(PROBABILISTIC_ROUNDS);
        let mut candidate = 2u64;
        while out.len() < PROBABILISTIC_ROUNDS {
            if out.iter().all(|p| !candidate.is_multiple_of(*p)) {
                out.push(candidate);
            }
            candidate += 1;
        }
        out
    });
    &all[..count.min(all.len())]
}

#[inline]
pub(crate) fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod_u64(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod_u64(acc, base, m);
        }
        base = mul_mod_u64(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Exact primality for every `u64`.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &DETERMINISTIC_BASES {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let d_shift = (n - 1).trailing_zeros();
    let d = (n - 1) >> d_shift;
    'witness: for &a in &DETERMINISTIC_BASES[..12] {
        let mut x = pow_mod_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..d_shift {
            x = mul_mod_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn strong_probable_prime(n: &BigUint, n_minus_one: &BigUint, d: &BigUint, s: u64, base: u64) -> bool {
    let a = BigUint::from(base) % n;
    if a.is_zero() {
        return true;
    }
    let mut x = a.modpow(d, n);
    if x.is_one() || &x == n_minus_one {
        return true;
    }
    for _ in 1..s {
        x = (&x * &x) % n;
        if &x == n_minus_one {
            return true;
        }
        if x.is_one() {
            return false;
        }
    }
    false
}

/// Primality test for arbitrary-precision values.
pub fn is_prime(n: &BigUint) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    if n.is_even() {
        return false;
    }
    for &p in first_primes(PROBABILISTIC_ROUNDS) {
        if (n % p).is_zero() {
            return false;
        }
    }
    let n_minus_one = n - 1u32;
    let s = n_minus_one.trailing_zeros().expect("n > 1");
    let d = &n_minus_one >> s;
    let bases: &[u64] =
        if n < deterministic_limit() { &DETERMINISTIC_BASES } else { first_primes(PROBABILISTIC_ROUNDS) };
    bases.iter().all(|&a| strong_probable_prime(n, &n_minus_one, &d, s, a))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial(n: u64) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
    }

    #[test]
    fn small_values_match_trial_division() {
        for n in 0..20_000u64 {
            assert_eq!(is_prime_u64(n), trial(n), "n = {n}");
        }
        assert!(!is_prime_u64(1));
        assert!(is_prime_u64(2));
        assert!(is_prime_u64(3221));
    }

    #[test]
    fn strong_pseudoprimes_rejected() {
        // 3215031751 fools bases 2, 3, 5, 7; 3825123056546413051 fools 2..=23
        for n in [2047u64, 1373653, 25326001, 3215031751, 3825123056546413051] {
            assert!(!is_prime_u64(n), "{n}");
        }
        let psp: BigUint = "318665857834031151167461".parse().unwrap();
        assert!(!is_prime(&psp));
    }

    #[test]
    fn large_primes() {
        let m127 = (BigUint::one() << 127u32) - 1u32;
        assert!(is_prime(&m127));
        let m128 = (BigUint::one() << 128u32) - 1u32;
        assert!(!is_prime(&m128));
        let m521 = (BigUint::one() << 521u32) - 1u32;
        assert!(is_prime(&m521));
        assert!(!is_prime(&(&m127 * &m127)));
        assert!(is_prime(&BigUint::from(18446744073709551557u64)));
    }
}
