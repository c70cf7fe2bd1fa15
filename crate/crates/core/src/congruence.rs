//! Divisibility and congruence probes: the smallest k with n | σ^k(n),
//! first failure of n | σ^k(n) for multiperfect n, the power-sum residue
//! identity for prime powers, divisibility for k coprime to τ(n), the
//! periodicity of σ_k(n) mod σ(n), and the odd-prime multiplicity structure
//! forced by σ(n) ≡ 0, σ_2(n) ≡ 2 (mod n) with 4 | n.

use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Pow, ToPrimitive, Zero};
use serde::Serialize;

use crate::arith::{is_prime, l_invariant, sigma, sigma_pow, tau, Factorization};
use crate::error::{Error, Result};
use crate::factorizer::Factorizer;
use crate::iterate::SigmaWalker;
use crate::scan::par_map_range;
use crate::serde_dec;
use crate::store::CsvRecord;

/// Default iteration horizon for divisibility searches.
pub const DEFAULT_K_MAX: u32 = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Goal {
    /// Smallest k ≥ 1 with n | σ^k(n).
    Divides,
    /// Smallest k ≥ 1 with n ∤ σ^k(n).
    FirstFailure,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CongruenceStatus {
    Resolved,
    UnresolvedBudget,
    NoKWithinHorizon,
}

impl fmt::Display for CongruenceStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CongruenceStatus::Resolved => "RESOLVED",
            CongruenceStatus::UnresolvedBudget => "UNRESOLVED_BUDGET",
            CongruenceStatus::NoKWithinHorizon => "NO_K_WITHIN_HORIZON",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ResidueRow {
    pub k: u32,
    #[serde(with = "serde_dec")]
    pub residue: BigUint,
}

/// Result of a search along σ^1(n), σ^2(n), ... for a divisibility event.
///
/// For [`Goal::Divides`] the table holds nonzero residues before `smallest_k`
/// and zero at it; for [`Goal::FirstFailure`] the reverse.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CongruenceReport {
    #[serde(with = "serde_dec")]
    pub n: BigUint,
    pub goal: Goal,
    pub smallest_k: Option<u32>,
    pub k_horizon: u32,
    pub residue_table: Vec<ResidueRow>,
    pub status: CongruenceStatus,
    pub work_used: u64,
}

impl CsvRecord for CongruenceReport {
    fn csv_header() -> &'static str {
        "n,smallest_k,status"
    }

    fn csv_row(&self) -> String {
        let k = self.smallest_k.map(|k| k.to_string()).unwrap_or_default();
        format!("{},{},{}", self.n, k, self.status)
    }
}

fn search(n: &BigUint, goal: Goal, k_max: u32, fz: &Factorizer) -> CongruenceReport {
    let mut walker = SigmaWalker::new(n, fz);
    let mut residue_table = Vec::new();
    let (smallest_k, status) = loop {
        if walker.k >= 1 {
            let residue = &walker.value % n;
            let hit = match goal {
                Goal::Divides => residue.is_zero(),
                Goal::FirstFailure => !residue.is_zero(),
            };
            residue_table.push(ResidueRow { k: walker.k, residue });
            if hit {
                break (Some(walker.k), CongruenceStatus::Resolved);
            }
        }
        if walker.k >= k_max {
            break (None, CongruenceStatus::NoKWithinHorizon);
        }
        if walker.advance().is_err() {
            break (None, CongruenceStatus::UnresolvedBudget);
        }
    };
    CongruenceReport {
        n: n.clone(),
        goal,
        smallest_k,
        k_horizon: k_max,
        residue_table,
        status,
        work_used: walker.work_used(),
    }
}

/// Smallest k in 1..=k_max with n | σ^k(n).
pub fn smallest_k_divisibility(n: &BigUint, k_max: u32, fz: &Factorizer) -> Result<CongruenceReport> {
    if *n < BigUint::from(2u32) || k_max == 0 {
        return Err(Error::PreconditionViolated("need n >= 2 and k_max >= 1".into()));
    }
    Ok(search(n, Goal::Divides, k_max, fz))
}

/// Smallest k in 1..=k_max with n ∤ σ^k(n), for multiperfect n.
pub fn metaperfect_first_failure(n: &BigUint, k_max: u32, fz: &Factorizer) -> Result<CongruenceReport> {
    if *n < BigUint::from(6u32) || k_max == 0 {
        return Err(Error::PreconditionViolated("need multiperfect n >= 6 and k_max >= 1".into()));
    }
    let f = fz.factor(n)?;
    if !(sigma(&f) % n).is_zero() {
        return Err(Error::NotMultiperfect(n.clone()));
    }
    Ok(search(n, Goal::FirstFailure, k_max, fz))
}

/// Divisibility search over `from..=to`, reports in ascending n. Entries left
/// unresolved by the budget are retried once with `retry_factor` times the
/// work when `retry_factor > 1`.
pub fn ctr_scan(
    from: u64,
    to: u64,
    k_max: u32,
    fz: &Factorizer,
    jobs: usize,
    retry_factor: u64,
) -> Result<Vec<CongruenceReport>> {
    if from < 2 || to < from || k_max == 0 {
        return Err(Error::PreconditionViolated("need 2 <= from <= to and k_max >= 1".into()));
    }
    let mut reports = par_map_range(from, to, jobs, |n| search(&BigUint::from(n), Goal::Divides, k_max, fz));
    if retry_factor > 1 {
        let wider = fz.with_budget(fz.budget().scaled(retry_factor));
        retry_unresolved(&mut reports, &wider, jobs);
    }
    Ok(reports)
}

/// Re-runs budget-limited reports with another factorizer, in place.
pub fn retry_unresolved(reports: &mut [CongruenceReport], fz: &Factorizer, jobs: usize) {
    let pending: Vec<usize> = reports
        .iter()
        .enumerate()
        .filter(|(_, r)| r.status == CongruenceStatus::UnresolvedBudget)
        .map(|(i, _)| i)
        .collect();
    let redone = crate::scan::par_map_indexed(pending.len(), jobs, |j| {
        let r = &reports[pending[j]];
        search(&r.n, r.goal, r.k_horizon, fz)
    });
    for (i, report) in pending.into_iter().zip(redone) {
        reports[i] = report;
    }
}

/// First-failure search over a list of multiperfect numbers.
pub fn meta_scan(ns: &[BigUint], k_max: u32, fz: &Factorizer, jobs: usize) -> Result<Vec<CongruenceReport>> {
    crate::scan::par_map_indexed(ns.len(), jobs, |i| metaperfect_first_failure(&ns[i], k_max, fz)).into_iter().collect()
}

/// σ_k(p^e) mod σ(p^e) against r·(p^{e+1}−1)/(p^r−1), r = gcd(k, e+1).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PowersumResidue {
    #[serde(with = "serde_dec")]
    pub p: BigUint,
    pub e: u32,
    pub k: u32,
    pub r: u32,
    #[serde(with = "serde_dec")]
    pub predicted: BigUint,
    #[serde(with = "serde_dec")]
    pub actual: BigUint,
    pub matches: bool,
    /// σ(p^e) | σ_k(p^e).
    pub divisible: bool,
}

impl CsvRecord for PowersumResidue {
    fn csv_header() -> &'static str {
        "p,e,k,r,predicted,actual,matches,divisible"
    }

    fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.p, self.e, self.k, self.r, self.predicted, self.actual, self.matches, self.divisible
        )
    }
}

pub fn powersum_residue(p: &BigUint, e: u32, k: u32) -> Result<PowersumResidue> {
    if e == 0 || k == 0 || !is_prime(p) {
        return Err(Error::PreconditionViolated("need prime p, e >= 1, k >= 1".into()));
    }
    let r = k.gcd(&(e + 1));
    let pe1: BigUint = Pow::pow(p, e + 1) - 1u32;
    let modulus = &pe1 / (p - 1u32);
    let pr: BigUint = Pow::pow(p, r) - 1u32;
    // r | e+1, so p^r − 1 divides p^{e+1} − 1
    let predicted = (BigUint::from(r) * (&pe1 / pr)) % &modulus;
    let pk: BigUint = Pow::pow(p, k);
    let sigma_k = (Pow::pow(&pk, e + 1) - 1u32) / (pk - 1u32);
    let actual = sigma_k % &modulus;
    Ok(PowersumResidue {
        p: p.clone(),
        e,
        k,
        r,
        matches: predicted == actual,
        divisible: actual.is_zero(),
        predicted,
        actual,
    })
}

/// σ(n) | σ_k(n) for k coprime to τ(n).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TauCoprimeReport {
    #[serde(with = "serde_dec")]
    pub n: BigUint,
    pub k: u32,
    #[serde(with = "serde_dec")]
    pub tau: BigUint,
    #[serde(with = "serde_dec")]
    pub sigma: BigUint,
    #[serde(with = "serde_dec")]
    pub sigma_k: BigUint,
    pub divides: bool,
    #[serde(with = "serde_dec::option")]
    pub quotient: Option<BigUint>,
}

pub fn tau_coprime_divisibility(f: &Factorization, k: u32) -> Result<TauCoprimeReport> {
    if f.value() < &BigUint::from(2u32) || k == 0 {
        return Err(Error::PreconditionViolated("need n >= 2 and k >= 1".into()));
    }
    let t = tau(f);
    if !t.gcd(&BigUint::from(k)).is_one() {
        return Err(Error::PreconditionViolated(format!("gcd({k}, tau = {t}) != 1")));
    }
    let s = sigma(f);
    let sk = sigma_pow(f, k);
    let (q, rem) = sk.div_rem(&s);
    Ok(TauCoprimeReport {
        n: f.value().clone(),
        k,
        tau: t,
        divides: rem.is_zero(),
        quotient: rem.is_zero().then_some(q),
        sigma: s,
        sigma_k: sk,
    })
}

/// n | σ_k(n) for odd k, for multiperfect n with τ(n) a power of two.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OddKReport {
    #[serde(with = "serde_dec")]
    pub n: BigUint,
    #[serde(with = "serde_dec")]
    pub tau: BigUint,
    pub rows: Vec<ResidueRow>,
    pub all_divide: bool,
}

pub fn odd_k_divisibility(f: &Factorization, k_max_odd: u32) -> Result<OddKReport> {
    let n = f.value();
    if n < &BigUint::from(2u32) || !(sigma(f) % n).is_zero() {
        return Err(Error::NotMultiperfect(n.clone()));
    }
    let t = tau(f);
    if t.count_ones() != 1 {
        return Err(Error::PreconditionViolated(format!("tau({n}) = {t} is not a power of two")));
    }
    let rows: Vec<ResidueRow> =
        (1..=k_max_odd).step_by(2).map(|k| ResidueRow { k, residue: sigma_pow(f, k) % n }).collect();
    Ok(OddKReport { n: n.clone(), tau: t, all_divide: rows.iter().all(|r| r.residue.is_zero()), rows })
}

/// σ_k(n) mod σ(n) for k = 1..=horizon and its least consistent period.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PeriodReport {
    #[serde(with = "serde_dec")]
    pub n: BigUint,
    #[serde(with = "serde_dec")]
    pub l: BigUint,
    pub horizon: u32,
    #[serde(with = "serde_dec::seq")]
    pub residues: Vec<BigUint>,
    pub observed_period: Option<u32>,
    /// None when no period was observed.
    pub divides_l: Option<bool>,
}

/// max(4L, 24), the window used when the caller gives none.
pub fn default_period_horizon(l: u32) -> u32 {
    (4 * l).max(24)
}

/// Least p ≤ len/2 with `seq[i] == seq[i + p]` across the whole window.
pub fn least_period<T: PartialEq>(seq: &[T]) -> Option<usize> {
    (1..=seq.len() / 2).find(|&p| (0..seq.len() - p).all(|i| seq[i] == seq[i + p]))
}

pub fn periodicity_probe(f: &Factorization, horizon: Option<u32>) -> Result<PeriodReport> {
    if f.value() < &BigUint::from(2u32) {
        return Err(Error::PreconditionViolated("periodicity probe needs n >= 2".into()));
    }
    let l = l_invariant(f);
    let l_small = l
        .to_u32()
        .filter(|&v| v <= 1 << 20)
        .ok_or_else(|| Error::PreconditionViolated(format!("L = {l} too large to sample")))?;
    let horizon = horizon.unwrap_or_else(|| default_period_horizon(l_small));
    if horizon < 2 * l_small {
        return Err(Error::PreconditionViolated(format!("horizon {horizon} < 2L = {}", 2 * l_small)));
    }
    let s = sigma(f);
    let residues: Vec<BigUint> = (1..=horizon).map(|k| sigma_pow(f, k) % &s).collect();
    let observed_period = least_period(&residues).map(|p| p as u32);
    let divides_l = observed_period.map(|p| l_small % p == 0);
    Ok(PeriodReport { n: f.value().clone(), l, horizon, residues, observed_period, divides_l })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NamedCheck {
    pub name: &'static str,
    pub passed: bool,
}

/// Hypotheses σ(n) ≡ 0, σ_2(n) ≡ 2 (mod n), n ≡ 0 (mod 4), and when all hold
/// the forced structure: every odd prime but one to an even power, the
/// remaining one to a power ≡ 1 (mod 4) and itself ≡ 3 (mod 4).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StructureReport {
    #[serde(with = "serde_dec")]
    pub n: BigUint,
    pub satisfies_congruences: bool,
    /// (odd prime, exponent) pairs.
    pub odd_factor_multiplicities: Vec<(String, u32)>,
    #[serde(with = "serde_dec::option")]
    pub distinguished_prime: Option<BigUint>,
    pub conclusions: Vec<NamedCheck>,
}

impl StructureReport {
    /// False only when the hypotheses hold and a structural conclusion fails.
    pub fn consistent(&self) -> bool {
        !self.satisfies_congruences || self.conclusions.iter().all(|c| c.passed)
    }
}

pub fn conjecture_structure_check(f: &Factorization) -> Result<StructureReport> {
    let n = f.value();
    if n < &BigUint::from(2u32) {
        return Err(Error::PreconditionViolated("structure check needs n >= 2".into()));
    }
    let sigma_zero = (sigma(f) % n).is_zero();
    let sigma2_two = sigma_pow(f, 2) % n == BigUint::from(2u32) % n;
    let four = (n % 4u32).is_zero();
    let mut conclusions = vec![
        NamedCheck { name: "sigma(n) = 0 mod n", passed: sigma_zero },
        NamedCheck { name: "sigma_2(n) = 2 mod n", passed: sigma2_two },
        NamedCheck { name: "n = 0 mod 4", passed: four },
    ];
    let odd: Vec<_> = f.parts().iter().filter(|p| p.prime.is_odd()).collect();
    let odd_factor_multiplicities = odd.iter().map(|p| (p.prime.to_string(), p.exponent)).collect();
    let satisfies = sigma_zero && sigma2_two && four;
    let mut distinguished_prime = None;
    if satisfies {
        let odd_exp: Vec<_> = odd.iter().filter(|p| p.exponent % 2 == 1).collect();
        let single = odd_exp.len() == 1;
        conclusions.push(NamedCheck { name: "exactly one odd prime has odd multiplicity", passed: single });
        if let [p] = odd_exp.as_slice() {
            distinguished_prime = Some(p.prime.clone());
            conclusions.push(NamedCheck { name: "its multiplicity is 1 mod 4", passed: p.exponent % 4 == 1 });
            conclusions.push(NamedCheck { name: "it is 3 mod 4", passed: (&p.prime % 4u32) == BigUint::from(3u32) });
        }
    }
    Ok(StructureReport {
        n: n.clone(),
        satisfies_congruences: satisfies,
        odd_factor_multiplicities,
        distinguished_prime,
        conclusions,
    })
}

/// σ^k(n) mod n beside σ_k(n) mod n.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IterVsPowerRow {
    pub k: u32,
    /// None once the iteration is blocked by the budget.
    #[serde(with = "serde_dec::option")]
    pub iterate_residue: Option<BigUint>,
    #[serde(with = "serde_dec")]
    pub powersum_residue: BigUint,
}

pub fn iterate_vs_powersum_report(n: &BigUint, k_max: u32, fz: &Factorizer) -> Result<Vec<IterVsPowerRow>> {
    if *n < BigUint::from(2u32) {
        return Err(Error::PreconditionViolated("need n >= 2".into()));
    }
    let f = fz.factor(n)?;
    let mut walker = SigmaWalker::new(n, fz);
    let mut rows = Vec::with_capacity(k_max as usize);
    let mut blocked = false;
    for k in 1..=k_max {
        if !blocked && walker.advance().is_err() {
            blocked = true;
        }
        rows.push(IterVsPowerRow {
            k,
            iterate_residue: (!blocked).then(|| &walker.value % n),
            powersum_residue: sigma_pow(&f, k) % n,
        });
    }
    Ok(rows)
}

/// Structure check over a range, keeping only n meeting all hypotheses.
pub fn conjecture_scan(from: u64, to: u64, jobs: usize) -> Vec<StructureReport> {
    par_map_range(from.max(2), to, jobs, |n| {
        let f = crate::arith::factor_u64(n);
        if !(sigma(&f) % f.value()).is_zero() {
            return None;
        }
        conjecture_structure_check(&f).ok().filter(|r| r.satisfies_congruences)
    })
    .into_iter()
    .flatten()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::factor_u64;

    fn b(n: u64) -> BigUint {
        BigUint::from(n)
    }

    #[test]
    fn smallest_k_examples() {
        let fz = Factorizer::default();
        for (n, k) in [(2u64, 2u32), (3, 4), (5, 5)] {
            let r = smallest_k_divisibility(&b(n), 100, &fz).unwrap();
            assert_eq!(r.smallest_k, Some(k), "n = {n}");
            assert_eq!(r.status, CongruenceStatus::Resolved);
            assert!(r.residue_table[..k as usize - 1].iter().all(|row| !row.residue.is_zero()));
        }
        let r = smallest_k_divisibility(&b(5), 3, &fz).unwrap();
        assert_eq!(r.status, CongruenceStatus::NoKWithinHorizon);
        assert_eq!(r.csv_row(), "5,,NO_K_WITHIN_HORIZON");
    }

    #[test]
    fn first_failure_examples() {
        let fz = Factorizer::default();
        let r = metaperfect_first_failure(&b(6), 10, &fz).unwrap();
        assert_eq!(r.smallest_k, Some(2));
        assert_eq!(r.residue_table.last().unwrap().residue, b(4));
        let r = metaperfect_first_failure(&b(28), 10, &fz).unwrap();
        assert_eq!(r.smallest_k, Some(2));
        assert_eq!(r.residue_table.last().unwrap().residue, b(8));
        assert!(matches!(metaperfect_first_failure(&b(12), 10, &fz), Err(Error::NotMultiperfect(_))));
    }

    #[test]
    fn powersum_examples() {
        let r = powersum_residue(&b(2), 1, 2).unwrap();
        assert_eq!((r.r, r.predicted.clone(), r.actual.clone(), r.matches), (2, b(2), b(2), true));
        let r = powersum_residue(&b(2), 2, 3).unwrap();
        assert_eq!((r.r, r.predicted.clone(), r.actual.clone(), r.matches), (3, b(3), b(3), true));
        let r = powersum_residue(&b(7), 3, 3).unwrap();
        assert_eq!(r.r, 1);
        assert!(r.divisible && r.predicted.is_zero());
        assert!(powersum_residue(&b(4), 1, 1).is_err());
    }

    #[test]
    fn tau_coprime_examples() {
        let r = tau_coprime_divisibility(&factor_u64(6), 3).unwrap();
        assert_eq!((r.sigma_k.clone(), r.quotient.clone()), (b(252), Some(b(21))));
        let r = tau_coprime_divisibility(&factor_u64(4), 2).unwrap();
        assert_eq!((r.sigma_k.clone(), r.quotient.clone()), (b(21), Some(b(3))));
        assert!(tau_coprime_divisibility(&factor_u64(97), 1).unwrap().divides);
        assert!(tau_coprime_divisibility(&factor_u64(6), 2).is_err());
    }

    #[test]
    fn odd_k_for_six() {
        let r = odd_k_divisibility(&factor_u64(6), 99).unwrap();
        assert_eq!(r.rows.len(), 50);
        assert!(r.all_divide);
        assert!(odd_k_divisibility(&factor_u64(28), 9).is_err()); // tau(28) = 6
        assert!(odd_k_divisibility(&factor_u64(10), 9).is_err());
    }

    #[test]
    fn periodicity_examples() {
        let r = periodicity_probe(&factor_u64(4), Some(12)).unwrap();
        assert_eq!(&r.residues[..3], &[b(0), b(0), b(3)]);
        assert_eq!((r.observed_period, r.divides_l), (Some(3), Some(true)));
        let r = periodicity_probe(&factor_u64(2), None).unwrap();
        assert_eq!(&r.residues[..2], &[b(0), b(2)]);
        assert_eq!(r.observed_period, Some(2));
        let r = periodicity_probe(&factor_u64(11), Some(8)).unwrap();
        assert_eq!(&r.residues[..2], &[b(0), b(2)]);
        assert_eq!(r.divides_l, Some(true));
        assert!(periodicity_probe(&factor_u64(4), Some(5)).is_err());
        assert_eq!(least_period(&[1, 2, 1, 2, 1]), Some(2));
        assert_eq!(least_period(&[1, 2, 3]), None);
        assert_eq!(least_period(&[1, 1, 2, 1, 1, 3]), None);
    }

    #[test]
    fn structure_examples() {
        let r = conjecture_structure_check(&factor_u64(6)).unwrap();
        let flags: Vec<bool> = r.conclusions.iter().map(|c| c.passed).collect();
        assert_eq!(flags, vec![true, true, false]);
        assert!(!r.satisfies_congruences && r.consistent());
        let r = conjecture_structure_check(&factor_u64(28)).unwrap();
        assert!(!r.conclusions[1].passed);
        assert_eq!(sigma_pow(&factor_u64(28), 2) % 28u32, b(14));
    }

    #[test]
    fn iterate_vs_powersum_for_six() {
        let fz = Factorizer::default();
        let rows = iterate_vs_powersum_report(&b(6), 3, &fz).unwrap();
        let pairs: Vec<(u64, u64)> = rows
            .iter()
            .map(|r| {
                (r.iterate_residue.clone().unwrap().try_into().unwrap(), r.powersum_residue.clone().try_into().unwrap())
            })
            .collect();
        assert_eq!(pairs, vec![(0, 0), (4, 2), (2, 0)]);
    }
}
