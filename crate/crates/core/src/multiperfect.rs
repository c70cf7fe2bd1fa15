//! Multiperfect numbers: sieve scan, the L invariant filter, and the
//! lemmas behind "multiperfect with L prime forces n = 6".

use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::arith::{
    factor_u64, is_prime, is_prime_u64, is_squarefree, l_invariant, sigma, sigma_prime_power, ExactRatio,
    Factorization, PrimePower,
};
use crate::error::{Error, Result};
use crate::factorizer::Factorizer;
use crate::scan::par_map_indexed;
use crate::serde_dec;
use crate::store::CsvRecord;

/// Smallest-prime-factor table for 0..=limit, built once and shared read-only.
pub struct SigmaSieve {
    spf: Vec<u32>,
}

impl SigmaSieve {
    pub fn new(limit: u32) -> Self {
        let len = limit as usize + 1;
        let mut spf = vec![0u32; len];
        for i in 2..len {
            if spf[i] == 0 {
                let mut j = i;
                while j < len {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
        }
        SigmaSieve { spf }
    }

    pub fn limit(&self) -> u32 {
        (self.spf.len() - 1) as u32
    }

    /// Panics above the sieve limit.
    pub fn sigma(&self, mut n: u32) -> u64 {
        let mut total = 1u64;
        while n > 1 {
            let p = self.spf[n as usize];
            let mut term = 1u64;
            let mut power = 1u64;
            while n.is_multiple_of(p) {
                n /= p;
                power *= p as u64;
                term += power;
            }
            total *= term;
        }
        total
    }

    pub fn factorization(&self, mut n: u32) -> Factorization {
        let mut parts = Vec::new();
        while n > 1 {
            let p = self.spf[n as usize];
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            parts.push(PrimePower::new(p, e));
        }
        Factorization::from_prime_parts(parts)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MultiperfectRecord {
    #[serde(with = "serde_dec")]
    pub n: BigUint,
    pub factorization: Factorization,
    /// σ(n)/n.
    #[serde(with = "serde_dec")]
    pub index: BigUint,
    #[serde(with = "serde_dec")]
    pub l: BigUint,
    pub l_prime: bool,
    pub squarefree: bool,
}

impl MultiperfectRecord {
    /// None unless n | σ(n) and n ≥ 2.
    pub fn from_factorization(f: Factorization) -> Option<Self> {
        let n = f.value().clone();
        if n < BigUint::from(2u32) {
            return None;
        }
        let (index, rem) = sigma(&f).div_rem(&n);
        if !rem.is_zero() {
            return None;
        }
        let l = l_invariant(&f);
        Some(MultiperfectRecord { l_prime: is_prime(&l), squarefree: is_squarefree(&f), index, l, factorization: f, n })
    }
}

impl CsvRecord for MultiperfectRecord {
    fn csv_header() -> &'static str {
        "n,index,l,l_prime,squarefree,factorization"
    }

    fn csv_row(&self) -> String {
        format!("{},{},{},{},{},{}", self.n, self.index, self.l, self.l_prime, self.squarefree, self.factorization)
    }
}

const CHUNK: u32 = 1 << 14;

/// Every 2 ≤ n ≤ limit with n | σ(n), ascending.
pub fn multiperfect_scan(limit: u32, jobs: usize) -> Result<Vec<MultiperfectRecord>> {
    if limit < 2 {
        return Err(Error::PreconditionViolated("scan limit must be >= 2".into()));
    }
    let sieve = SigmaSieve::new(limit);
    let chunks = (limit / CHUNK + 1) as usize;
    let hits: Vec<Vec<u32>> = par_map_indexed(chunks, jobs, |c| {
        let lo = (c as u32 * CHUNK).max(2);
        let hi = (c as u32 * CHUNK).saturating_add(CHUNK - 1).min(limit);
        (lo..=hi).filter(|&n| sieve.sigma(n).is_multiple_of(n as u64)).collect()
    });
    Ok(hits
        .into_iter()
        .flatten()
        .filter_map(|n| MultiperfectRecord::from_factorization(sieve.factorization(n)))
        .collect())
}

/// Records whose L invariant is prime.
pub fn lprime_filter(records: &[MultiperfectRecord]) -> Vec<MultiperfectRecord> {
    records.iter().filter(|r| r.l_prime).cloned().collect()
}

pub fn squarefree_multiperfect_scan(limit: u32, jobs: usize) -> Result<Vec<MultiperfectRecord>> {
    Ok(multiperfect_scan(limit, jobs)?.into_iter().filter(|r| r.squarefree).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FactorClass {
    EqualsL,
    OneModL,
    Violation,
}

impl fmt::Display for FactorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FactorClass::EqualsL => "EQUALS_L",
            FactorClass::OneModL => "ONE_MOD_L",
            FactorClass::Violation => "VIOLATION",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassifiedFactor {
    #[serde(with = "serde_dec")]
    pub q: BigUint,
    pub exponent: u32,
    pub class: FactorClass,
}

/// Prime factors of σ(p^{L−1}) classified against L.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CyclotomicReport {
    #[serde(with = "serde_dec")]
    pub p: BigUint,
    pub l: u32,
    /// p = L, the case outside the lemma's statement.
    pub same_prime: bool,
    #[serde(with = "serde_dec")]
    pub value: BigUint,
    pub factors: Vec<ClassifiedFactor>,
    pub violations: usize,
}

pub fn cyclotomic_factor_check(p: &BigUint, l: u32, fz: &Factorizer) -> Result<CyclotomicReport> {
    if !is_prime(p) || !is_prime_u64(l as u64) {
        return Err(Error::PreconditionViolated("p and L must be prime".into()));
    }
    let value = sigma_prime_power(&PrimePower::new(p.clone(), l - 1));
    let f = fz.factor(&value)?;
    let l_big = BigUint::from(l);
    let factors: Vec<ClassifiedFactor> = f
        .parts()
        .iter()
        .map(|part| {
            let class = if part.prime == l_big {
                FactorClass::EqualsL
            } else if (&part.prime % l) == BigUint::from(1u32) {
                FactorClass::OneModL
            } else {
                FactorClass::Violation
            };
            ClassifiedFactor { q: part.prime.clone(), exponent: part.exponent, class }
        })
        .collect();
    Ok(CyclotomicReport {
        p: p.clone(),
        l,
        same_prime: *p == l_big,
        value,
        violations: factors.iter().filter(|c| c.class == FactorClass::Violation).count(),
        factors,
    })
}

/// Exponent of L in σ(q^{L−1}).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LValuation {
    #[serde(with = "serde_dec")]
    pub q: BigUint,
    pub l: u32,
    #[serde(with = "serde_dec")]
    pub value: BigUint,
    pub valuation: u32,
    pub exact_once: bool,
}

fn valuation(mut v: BigUint, l: u32) -> u32 {
    let mut count = 0;
    while !v.is_zero() && (&v % l).is_zero() {
        v /= l;
        count += 1;
    }
    count
}

/// For odd prime L and prime q ≡ 1 (mod L), L divides σ(q^{L−1}) exactly once.
pub fn exact_l_divisibility(q: &BigUint, l: u32) -> Result<LValuation> {
    if l == 2 || !is_prime_u64(l as u64) {
        return Err(Error::PreconditionViolated(format!("L = {l} must be an odd prime")));
    }
    if !is_prime(q) || (q % l) != BigUint::from(1u32) {
        return Err(Error::PreconditionViolated(format!("q = {q} must be a prime = 1 mod {l}")));
    }
    Ok(l_valuation_unchecked(q, l))
}

/// The L = 2 case without any expectation: σ(q) = q + 1 for odd prime q.
pub fn l2_valuation_diagnostic(q: &BigUint) -> Result<LValuation> {
    if !is_prime(q) || q.is_even() {
        return Err(Error::PreconditionViolated(format!("q = {q} must be an odd prime")));
    }
    Ok(l_valuation_unchecked(q, 2))
}

fn l_valuation_unchecked(q: &BigUint, l: u32) -> LValuation {
    let value = sigma_prime_power(&PrimePower::new(q.clone(), l - 1));
    let v = valuation(value.clone(), l);
    LValuation { q: q.clone(), l, value, valuation: v, exact_once: v == 1 }
}

/// (L/(L−1))^{m+1} ≥ index ≥ L, compared exactly.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundCheck {
    pub l: u32,
    pub m_count: u32,
    pub lhs: ExactRatio,
    pub mid: ExactRatio,
    pub rhs: ExactRatio,
    pub consistent: bool,
}

/// Accepts synthetic (L, m, index) triples as well as real records.
pub fn result2_bound_check(l: u32, m_count: u32, index: &BigUint) -> Result<BoundCheck> {
    if l < 2 {
        return Err(Error::PreconditionViolated("L must be >= 2".into()));
    }
    let lhs = ExactRatio::new(l, l - 1).pow(m_count + 1);
    let mid = ExactRatio::from_integer(index.clone());
    let rhs = ExactRatio::from_integer(l);
    Ok(BoundCheck { l, m_count, consistent: lhs >= mid && mid >= rhs, lhs, mid, rhs })
}

/// The bound for a record with prime L, m counting its primes ≡ 1 (mod L).
pub fn result2_bound_for_record(record: &MultiperfectRecord) -> Result<BoundCheck> {
    if !record.l_prime {
        return Err(Error::PreconditionViolated(format!("L = {} is not prime", record.l)));
    }
    let l = record.l.to_u32().ok_or_else(|| Error::PreconditionViolated("L too large".into()))?;
    let m_count = record.factorization.parts().iter().filter(|p| (&p.prime % l) == BigUint::from(1u32)).count() as u32;
    result2_bound_check(l, m_count, &record.index)
}

/// Largest prime ≤ second largest + 1, for squarefree f with two or more primes.
pub fn prime_gap_check(f: &Factorization) -> Result<bool> {
    if !is_squarefree(f) {
        return Err(Error::PreconditionViolated(format!("{} is not squarefree", f.value())));
    }
    match f.parts() {
        [.., second, largest] => Ok(largest.prime <= &second.prime + 1u32),
        parts => Err(Error::TooFewFactors(parts.len())),
    }
}

/// Convenience for callers holding plain integers.
pub fn record_for(n: u64) -> Option<MultiperfectRecord> {
    MultiperfectRecord::from_factorization(factor_u64(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(n: u64) -> BigUint {
        BigUint::from(n)
    }

    fn ns(records: &[MultiperfectRecord]) -> Vec<u64> {
        records.iter().map(|r| r.n.to_u64().unwrap()).collect()
    }

    #[test]
    fn small_scans() {
        assert_eq!(ns(&multiperfect_scan(100, 2).unwrap()), vec![6, 28]);
        assert!(multiperfect_scan(5, 1).unwrap().is_empty());
        assert!(multiperfect_scan(1, 1).is_err());
        assert!(squarefree_multiperfect_scan(5, 1).unwrap().is_empty());
    }

    #[test]
    fn sieve_sigma_matches_factorization() {
        let sieve = SigmaSieve::new(5000);
        for n in 1..=5000u32 {
            let f = sieve.factorization(n);
            assert_eq!(BigUint::from(sieve.sigma(n)), sigma(&f));
            assert_eq!(f, factor_u64(n as u64));
        }
    }

    #[test]
    fn lprime_examples() {
        let records = multiperfect_scan(1000, 1).unwrap();
        assert_eq!(ns(&lprime_filter(&records)), vec![6]);
        let r28 = record_for(28).unwrap();
        assert_eq!(r28.l, b(6));
        assert!(!r28.l_prime);
        assert!(record_for(6).unwrap().l_prime);
        assert!(record_for(12).is_none());
    }

    #[test]
    fn cyclotomic_examples() {
        let fz = Factorizer::default();
        let r = cyclotomic_factor_check(&b(3), 5, &fz).unwrap();
        assert_eq!(r.value, b(121));
        assert_eq!(r.factors, vec![ClassifiedFactor { q: b(11), exponent: 2, class: FactorClass::OneModL }]);
        let r = cyclotomic_factor_check(&b(7), 2, &fz).unwrap();
        assert_eq!(r.factors, vec![ClassifiedFactor { q: b(2), exponent: 3, class: FactorClass::EqualsL }]);
        let r = cyclotomic_factor_check(&b(2), 3, &fz).unwrap();
        assert_eq!((r.value.clone(), r.factors[0].class), (b(7), FactorClass::OneModL));
        assert!(cyclotomic_factor_check(&b(3), 3, &fz).unwrap().same_prime);
        assert!(cyclotomic_factor_check(&b(4), 3, &fz).is_err());
    }

    #[test]
    fn exact_l_examples() {
        for (q, l, value) in [(11u64, 5u32, 16105u64), (7, 3, 57), (31, 3, 993)] {
            let r = exact_l_divisibility(&b(q), l).unwrap();
            assert_eq!((r.value.clone(), r.valuation, r.exact_once), (b(value), 1, true));
        }
        assert!(exact_l_divisibility(&b(3), 2).is_err());
        assert!(exact_l_divisibility(&b(5), 3).is_err());
        // σ(3) = 4: the L = 2 case has valuation 2
        assert_eq!(l2_valuation_diagnostic(&b(3)).unwrap().valuation, 2);
    }

    #[test]
    fn bound_examples() {
        let six = result2_bound_for_record(&record_for(6).unwrap()).unwrap();
        assert_eq!((six.m_count, six.lhs.to_string(), six.consistent), (1, "4/1".into(), true));
        let synth = result2_bound_check(3, 4, &b(3)).unwrap();
        assert_eq!(synth.lhs.to_string(), "243/32");
        assert!(synth.consistent);
        let synth = result2_bound_check(5, 2, &b(5)).unwrap();
        assert_eq!(synth.lhs.to_string(), "125/64");
        assert!(!synth.consistent);
        assert!(result2_bound_for_record(&record_for(28).unwrap()).is_err());
    }

    #[test]
    fn prime_gap_examples() {
        assert!(prime_gap_check(&factor_u64(6)).unwrap());
        assert!(!prime_gap_check(&factor_u64(10)).unwrap());
        assert!(!prime_gap_check(&factor_u64(42)).unwrap());
        assert!(matches!(prime_gap_check(&factor_u64(7)), Err(Error::TooFewFactors(1))));
        assert!(prime_gap_check(&factor_u64(28)).is_err());
    }
}
