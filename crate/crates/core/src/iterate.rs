//! σ-iteration and aliquot iteration, with the diagnostic sequences built
//! on them: gcd and ratio sequences, the square probe, increasing aliquot
//! chains, the growth-inequality sampler, and the abundancy product check
//! for multiperfect starts.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;

use num_traits::{One, Pow, Zero};
use serde::{Serialize, Serializer};

use crate::arith::{abundancy, aliquot, decimal_digits, sigma, ExactRatio, Factorization, WorkMeter};
use crate::error::{Error, Result};
use crate::factorizer::Factorizer;
use crate::scan::par_map_range;
use crate::serde_dec;

/// Default cap on distinct values remembered for aliquot cycle detection.
pub const DEFAULT_CYCLE_CAP: usize = 10_000;

/// One step of a trace.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceEntry {
    pub k: u32,
    #[serde(with = "serde_dec")]
    pub value: BigUint,
    /// Absent when factoring failed or the value is wider than the trace keeps.
    pub factorization: Option<Factorization>,
    #[serde(with = "serde_dec")]
    pub residue_mod_start: BigUint,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SigmaStatus {
    Complete,
    BudgetExhausted,
    DigitLimit,
}

impl SigmaStatus {
    fn from_error(e: &Error) -> Self {
        match e {
            Error::DigitLimit { .. } => SigmaStatus::DigitLimit,
            _ => SigmaStatus::BudgetExhausted,
        }
    }
}

impl fmt::Display for SigmaStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SigmaStatus::Complete => "COMPLETE",
            SigmaStatus::BudgetExhausted => "BUDGET_EXHAUSTED",
            SigmaStatus::DigitLimit => "DIGIT_LIMIT",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SigmaTrace {
    #[serde(with = "serde_dec")]
    pub start: BigUint,
    pub entries: Vec<TraceEntry>,
    pub status: SigmaStatus,
    pub work_used: u64,
}

impl SigmaTrace {
    pub fn values(&self) -> impl Iterator<Item = &BigUint> {
        self.entries.iter().map(|e| &e.value)
    }
}

/// Walks m_0 = n, m_{k+1} = σ(m_k), keeping each value's factorization in hand.
///
/// σ(m_k) is factored term by term from the factorization of m_k; when that
/// fails the value is still exact, only its factorization is missing, and
/// the walk cannot go further.
pub(crate) struct SigmaWalker<'a> {
    fz: &'a Factorizer,
    meter: WorkMeter,
    pub k: u32,
    pub value: BigUint,
    pub factorization: std::result::Result<Factorization, Error>,
}

impl<'a> SigmaWalker<'a> {
    pub fn new(n: &BigUint, fz: &'a Factorizer) -> Self {
        let mut meter = fz.meter();
        let factorization = fz.factor_with(n, &mut meter);
        SigmaWalker { fz, meter, k: 0, value: n.clone(), factorization }
    }

    /// Steps once. Fails when the current value has no factorization.
    pub fn advance(&mut self) -> std::result::Result<(), SigmaStatus> {
        let f = self.factorization.as_ref().map_err(SigmaStatus::from_error)?;
        let next = sigma(f);
        let digits = decimal_digits(&next);
        let limit = self.fz.budget().max_digits;
        let next_factorization = if digits > limit {
            Err(Error::DigitLimit { digits, limit })
        } else {
            self.fz.factor_sigma(f, &mut self.meter)
        };
        self.k += 1;
        self.value = next;
        self.factorization = next_factorization;
        Ok(())
    }

    pub fn work_used(&self) -> u64 {
        self.meter.used()
    }

    fn entry(&self, start: &BigUint, keep_digits: usize) -> TraceEntry {
        let factorization =
            self.factorization.as_ref().ok().filter(|_| decimal_digits(&self.value) <= keep_digits).cloned();
        TraceEntry { k: self.k, value: self.value.clone(), factorization, residue_mod_start: &self.value % start }
    }
}

/// σ^0(n), ..., σ^{k_max}(n), stopping early on budget or digit limits.
pub fn iterate_sigma(n: &BigUint, k_max: u32, fz: &Factorizer) -> Result<SigmaTrace> {
    if n.is_zero() {
        return Err(Error::PreconditionViolated("sigma iteration needs n >= 1".into()));
    }
    let mut walker = SigmaWalker::new(n, fz);
    let mut entries = Vec::new();
    let status = loop {
        entries.push(walker.entry(n, fz.trace_factor_digits()));
        if walker.k >= k_max {
            break SigmaStatus::Complete;
        }
        if let Err(status) = walker.advance() {
            break status;
        }
    };
    Ok(SigmaTrace { start: n.clone(), entries, status, work_used: walker.work_used() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AliquotStatus {
    ReachedZero,
    /// The last value repeats the one this many steps earlier.
    Cycle(usize),
    BudgetExhausted,
    DigitLimit,
    Horizon,
}

impl fmt::Display for AliquotStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AliquotStatus::ReachedZero => f.write_str("REACHED_ZERO"),
            AliquotStatus::Cycle(c) => write!(f, "CYCLE({c})"),
            AliquotStatus::BudgetExhausted => f.write_str("BUDGET_EXHAUSTED"),
            AliquotStatus::DigitLimit => f.write_str("DIGIT_LIMIT"),
            AliquotStatus::Horizon => f.write_str("HORIZON"),
        }
    }
}

impl Serialize for AliquotStatus {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AliquotTrace {
    #[serde(with = "serde_dec")]
    pub start: BigUint,
    pub entries: Vec<TraceEntry>,
    pub status: AliquotStatus,
    pub work_used: u64,
}

impl AliquotTrace {
    pub fn values(&self) -> impl Iterator<Item = &BigUint> {
        self.entries.iter().map(|e| &e.value)
    }
}

pub fn iterate_aliquot(n: &BigUint, k_max: u32, fz: &Factorizer) -> Result<AliquotTrace> {
    iterate_aliquot_capped(n, k_max, DEFAULT_CYCLE_CAP, fz)
}

/// Aliquot iteration until zero, a repeat, `k_max` steps, `cycle_cap`
/// remembered values, or a factoring failure.
pub fn iterate_aliquot_capped(n: &BigUint, k_max: u32, cycle_cap: usize, fz: &Factorizer) -> Result<AliquotTrace> {
    if n.is_zero() {
        return Err(Error::PreconditionViolated("aliquot iteration needs n >= 1".into()));
    }
    let mut meter = fz.meter();
    let mut seen: HashMap<BigUint, usize> = HashMap::new();
    let mut entries = Vec::new();
    let mut value = n.clone();
    let keep = fz.trace_factor_digits();
    let mut k = 0u32;
    let bare = |k: u32, value: &BigUint| TraceEntry {
        k,
        value: value.clone(),
        factorization: None,
        residue_mod_start: value % n,
    };
    let status = loop {
        if let Some(&j) = seen.get(&value) {
            entries.push(bare(k, &value));
            break AliquotStatus::Cycle(k as usize - j);
        }
        if value.is_zero() {
            entries.push(bare(k, &value));
            break AliquotStatus::ReachedZero;
        }
        if k >= k_max || seen.len() >= cycle_cap {
            entries.push(bare(k, &value));
            break AliquotStatus::Horizon;
        }
        let f = match fz.factor_with(&value, &mut meter) {
            Ok(f) => f,
            Err(e) => {
                entries.push(bare(k, &value));
                break match e {
                    Error::DigitLimit { .. } => AliquotStatus::DigitLimit,
                    _ => AliquotStatus::BudgetExhausted,
                };
            }
        };
        seen.insert(value.clone(), k as usize);
        let next = aliquot(&f);
        let mut entry = bare(k, &value);
        if decimal_digits(&value) <= keep {
            entry.factorization = Some(f);
        }
        entries.push(entry);
        value = next;
        k += 1;
    };
    Ok(AliquotTrace { start: n.clone(), entries, status, work_used: meter.used() })
}

/// g_0 = n, g_{k+1} = gcd(g_k, σ^{k+1}(n)).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GcdSequence {
    #[serde(with = "serde_dec")]
    pub start: BigUint,
    #[serde(with = "serde_dec::seq")]
    pub values: Vec<BigUint>,
    pub status: SigmaStatus,
}

impl GcdSequence {
    pub fn minimum(&self) -> &BigUint {
        self.values.last().expect("g_0 always present")
    }
}

pub fn gcd_sequence(n: &BigUint, k_max: u32, fz: &Factorizer) -> Result<GcdSequence> {
    let trace = iterate_sigma(n, k_max, fz)?;
    Ok(gcd_sequence_of(&trace))
}

pub fn gcd_sequence_of(trace: &SigmaTrace) -> GcdSequence {
    let mut values: Vec<BigUint> = Vec::with_capacity(trace.entries.len());
    for entry in &trace.entries {
        let g = match values.last() {
            None => entry.value.clone(),
            Some(prev) => prev.gcd(&entry.value),
        };
        values.push(g);
    }
    GcdSequence { start: trace.start.clone(), values, status: trace.status }
}

/// r_i = σ^{i+1}(n) / σ^i(n) = S(σ^i(n)).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RatioSequence {
    #[serde(with = "serde_dec")]
    pub start: BigUint,
    pub ratios: Vec<ExactRatio>,
    pub status: SigmaStatus,
}

pub fn ratio_sequence(n: &BigUint, k_max: u32, fz: &Factorizer) -> Result<RatioSequence> {
    if *n < BigUint::from(2u32) {
        return Err(Error::PreconditionViolated("ratio sequence needs n >= 2".into()));
    }
    let trace = iterate_sigma(n, k_max, fz)?;
    Ok(ratio_sequence_of(&trace))
}

pub fn ratio_sequence_of(trace: &SigmaTrace) -> RatioSequence {
    let ratios = trace.entries.windows(2).map(|w| ExactRatio::new(w[1].value.clone(), w[0].value.clone())).collect();
    RatioSequence { start: trace.start.clone(), ratios, status: trace.status }
}

/// n = a² or n = 2a².
pub fn is_square_or_twice_square(n: &BigUint) -> bool {
    let is_square = |m: &BigUint| {
        let r = m.sqrt();
        &r * &r == *m
    };
    is_square(n) || (n.is_even() && is_square(&(n >> 1u32)))
}

/// First k whose trace value is a square or twice a square.
pub fn square_probe(trace: &SigmaTrace) -> Option<u32> {
    trace.entries.iter().find(|e| !e.value.is_zero() && is_square_or_twice_square(&e.value)).map(|e| e.k)
}

/// An m whose aliquot iterates strictly increase for k steps.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LenstraChain {
    pub k: u32,
    #[serde(with = "serde_dec::seq")]
    pub chain: Vec<BigUint>,
}

impl LenstraChain {
    pub fn start(&self) -> &BigUint {
        &self.chain[0]
    }
}

/// s^0(m), ..., s^k(m) while strictly increasing; stops at the first
/// non-increase. Length k + 1 means the whole chain rises.
fn rising_prefix(m: &BigUint, k: u32, fz: &Factorizer, meter: &mut WorkMeter) -> Result<Vec<BigUint>> {
    let mut chain = vec![m.clone()];
    for _ in 0..k {
        let last = chain.last().expect("nonempty");
        if last.is_zero() {
            break;
        }
        let next = aliquot(&fz.factor_with(last, meter)?);
        let rising = next > *last;
        chain.push(next);
        if !rising {
            break;
        }
    }
    Ok(chain)
}

/// Smallest m ≤ m_max with s^0(m) < s^1(m) < ... < s^k(m).
pub fn lenstra_chain_search(k: u32, m_max: u64, fz: &Factorizer) -> Result<Option<LenstraChain>> {
    if k == 0 {
        return Err(Error::PreconditionViolated("chain length k must be >= 1".into()));
    }
    for m in 1..=m_max {
        let mut meter = fz.meter();
        let chain = rising_prefix(&BigUint::from(m), k, fz, &mut meter)?;
        if chain.len() == k as usize + 1 && chain.windows(2).all(|w| w[0] < w[1]) {
            let found = LenstraChain { k, chain };
            if !verify_lenstra_chain(&found, fz)? {
                return Err(Error::PreconditionViolated(format!("chain for {m} failed recomputation")));
            }
            return Ok(Some(found));
        }
    }
    Ok(None)
}

/// Recomputes every link from scratch with fresh factorizations.
pub fn verify_lenstra_chain(chain: &LenstraChain, fz: &Factorizer) -> Result<bool> {
    if chain.chain.len() != chain.k as usize + 1 {
        return Ok(false);
    }
    for w in chain.chain.windows(2) {
        let f = crate::arith::factor(&w[0], fz.budget())?;
        if aliquot(&f) != w[1] || w[0] >= w[1] {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Outcome of the growth-inequality check over a range of m.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ErdosReport {
    pub k: u32,
    pub delta: ExactRatio,
    pub m_lo: u64,
    pub m_hi: u64,
    /// m whose chain reaches 0 or 1 before step k.
    pub inapplicable: u64,
    pub applicable: u64,
    /// m whose factorizations ran out of budget.
    pub unresolved: u64,
    /// Index i−1 counts the m violating the inequality at step i.
    pub violations_by_step: Vec<u64>,
    /// m violating at one step or more.
    pub violating: u64,
    pub fraction: ExactRatio,
    /// Smallest violating m, capped.
    pub violators: Vec<u64>,
}

#[derive(Clone, Debug)]
enum ErdosOutcome {
    Inapplicable,
    Unresolved,
    Checked(Vec<bool>),
}

fn erdos_one(m: u64, k: u32, num: &BigUint, den: &BigUint, fz: &Factorizer) -> ErdosOutcome {
    let mut meter = fz.meter();
    let mut chain = vec![BigUint::from(m)];
    for j in 1..=k {
        let f = match fz.factor_with(chain.last().expect("nonempty"), &mut meter) {
            Ok(f) => f,
            Err(_) => return ErdosOutcome::Unresolved,
        };
        let next = aliquot(&f);
        if j < k && next <= BigUint::one() {
            return ErdosOutcome::Inapplicable;
        }
        chain.push(next);
    }
    let m_big = &chain[0];
    let s1 = &chain[1];
    // m·(s1/m)^i = s1^i / m^(i−1); with delta = num/den, compare
    //   (den − num)·s1^i < den·s_i·m^(i−1) < (den + num)·s1^i
    let violations = (1..=k)
        .map(|i| {
            let s1_pow: BigUint = Pow::pow(s1, i);
            let scaled = den * &chain[i as usize] * Pow::pow(m_big, i - 1);
            let lower = (den - num) * &s1_pow;
            let upper = (den + num) * &s1_pow;
            !(lower < scaled && scaled < upper)
        })
        .collect();
    ErdosOutcome::Checked(violations)
}

/// Counts m in `[m_lo, m_hi]` violating
/// (1−δ)·m·(s(m)/m)^i < s^i(m) < (1+δ)·m·(s(m)/m)^i for some 1 ≤ i ≤ k.
pub fn erdos_sampler(
    k: u32,
    delta: &ExactRatio,
    m_lo: u64,
    m_hi: u64,
    fz: &Factorizer,
    jobs: usize,
    violator_cap: usize,
) -> Result<ErdosReport> {
    if k == 0 || m_lo < 2 || m_hi < m_lo {
        return Err(Error::PreconditionViolated("need k >= 1 and 2 <= m_lo <= m_hi".into()));
    }
    if !delta.is_proper_fraction() {
        return Err(Error::PreconditionViolated(format!("delta {delta} must lie in (0, 1)")));
    }
    let (num, den) = (delta.numerator().clone(), delta.denominator().clone());
    let outcomes = par_map_range(m_lo, m_hi, jobs, |m| erdos_one(m, k, &num, &den, fz));
    let mut report = ErdosReport {
        k,
        delta: delta.clone(),
        m_lo,
        m_hi,
        inapplicable: 0,
        applicable: 0,
        unresolved: 0,
        violations_by_step: vec![0; k as usize],
        violating: 0,
        fraction: ExactRatio::from_integer(0u32),
        violators: Vec::new(),
    };
    for (m, outcome) in (m_lo..=m_hi).zip(outcomes) {
        match outcome {
            ErdosOutcome::Inapplicable => report.inapplicable += 1,
            ErdosOutcome::Unresolved => report.unresolved += 1,
            ErdosOutcome::Checked(flags) => {
                report.applicable += 1;
                for (slot, &bad) in report.violations_by_step.iter_mut().zip(&flags) {
                    *slot += bad as u64;
                }
                if flags.iter().any(|&b| b) {
                    report.violating += 1;
                    if report.violators.len() < violator_cap {
                        report.violators.push(m);
                    }
                }
            }
        }
    }
    if report.applicable > 0 {
        report.fraction = ExactRatio::new(report.violating, report.applicable);
    }
    Ok(report)
}

/// S(S(n)·n) against S(n)·S(S(n)) for multiperfect n.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Eq1Report {
    #[serde(with = "serde_dec")]
    pub n: BigUint,
    #[serde(with = "serde_dec")]
    pub index: BigUint,
    /// gcd(S(n), n) = 1, in which case the two sides are equal.
    pub coprime: bool,
    pub lhs: ExactRatio,
    pub rhs: ExactRatio,
    pub holds: bool,
}

pub fn eq1_check(n: &BigUint, fz: &Factorizer) -> Result<Eq1Report> {
    if *n <= BigUint::one() {
        return Err(Error::NotMultiperfect(n.clone()));
    }
    let f = fz.factor(n)?;
    let s = abundancy(&f);
    let index = s.to_integer().ok_or_else(|| Error::NotMultiperfect(n.clone()))?;
    let fi = fz.factor(&index)?;
    let lhs = abundancy(&f.multiply(&fi));
    let rhs = &s * &abundancy(&fi);
    Ok(Eq1Report { n: n.clone(), coprime: index.gcd(n).is_one(), index, holds: lhs < rhs, lhs, rhs })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(n: u64) -> BigUint {
        BigUint::from(n)
    }

    fn values(trace: &SigmaTrace) -> Vec<u64> {
        trace.values().map(|v| v.try_into().unwrap()).collect()
    }

    #[test]
    fn sigma_trace_of_six() {
        let fz = Factorizer::default();
        let t = iterate_sigma(&b(6), 2, &fz).unwrap();
        assert_eq!(values(&t), vec![6, 12, 28]);
        let residues: Vec<BigUint> = t.entries.iter().map(|e| e.residue_mod_start.clone()).collect();
        assert_eq!(residues, vec![b(0), b(0), b(4)]);
        assert_eq!(t.status, SigmaStatus::Complete);
        let t0 = iterate_sigma(&b(6), 0, &fz).unwrap();
        assert_eq!(values(&t0), vec![6]);
    }

    #[test]
    fn aliquot_examples() {
        let fz = Factorizer::default();
        let t = iterate_aliquot(&b(6), 50, &fz).unwrap();
        assert_eq!(t.status, AliquotStatus::Cycle(1));
        let t = iterate_aliquot(&b(12), 50, &fz).unwrap();
        let vals: Vec<u64> = t.values().map(|v| v.try_into().unwrap()).collect();
        assert_eq!(vals, vec![12, 16, 15, 9, 4, 3, 1, 0]);
        assert_eq!(t.status, AliquotStatus::ReachedZero);
        let t = iterate_aliquot(&b(220), 50, &fz).unwrap();
        let vals: Vec<u64> = t.values().map(|v| v.try_into().unwrap()).collect();
        assert_eq!(vals, vec![220, 284, 220]);
        assert_eq!(t.status, AliquotStatus::Cycle(2));
        assert_eq!(t.status.to_string(), "CYCLE(2)");
        // 12496 heads a sociable cycle of length 5
        assert_eq!(iterate_aliquot(&b(12496), 50, &fz).unwrap().status, AliquotStatus::Cycle(5));
    }

    #[test]
    fn aliquot_horizon_and_cap() {
        let fz = Factorizer::default();
        assert_eq!(iterate_aliquot(&b(12), 3, &fz).unwrap().status, AliquotStatus::Horizon);
        assert_eq!(iterate_aliquot_capped(&b(12), 50, 2, &fz).unwrap().status, AliquotStatus::Horizon);
    }

    #[test]
    fn gcd_and_ratio_sequences() {
        let fz = Factorizer::default();
        assert_eq!(gcd_sequence(&b(6), 3, &fz).unwrap().values, vec![b(6), b(6), b(2), b(2)]);
        assert_eq!(gcd_sequence(&b(13), 1, &fz).unwrap().values, vec![b(13), b(1)]);
        let r = ratio_sequence(&b(6), 2, &fz).unwrap();
        assert_eq!(r.ratios, vec![ExactRatio::new(2u32, 1u32), ExactRatio::new(7u32, 3u32)]);
        assert_eq!(ratio_sequence(&b(2), 1, &fz).unwrap().ratios, vec![ExactRatio::new(3u32, 2u32)]);
        assert!(ratio_sequence(&b(1), 1, &fz).is_err());
    }

    #[test]
    fn square_probe_examples() {
        let fz = Factorizer::default();
        assert_eq!(square_probe(&iterate_sigma(&b(1), 3, &fz).unwrap()), Some(0));
        assert_eq!(square_probe(&iterate_sigma(&b(2), 3, &fz).unwrap()), Some(0));
        // 5, 6, 12, 28, 56: none is a square or twice one
        assert_eq!(square_probe(&iterate_sigma(&b(5), 4, &fz).unwrap()), None);
        assert!(is_square_or_twice_square(&b(72)));
        assert!(!is_square_or_twice_square(&b(56)));
    }

    #[test]
    fn lenstra_examples() {
        let fz = Factorizer::default();
        assert_eq!(lenstra_chain_search(1, 1000, &fz).unwrap().unwrap().start(), &b(12));
        let two = lenstra_chain_search(2, 1000, &fz).unwrap().unwrap();
        assert_eq!(two.chain, vec![b(24), b(36), b(55)]);
        assert!(lenstra_chain_search(1, 11, &fz).unwrap().is_none());
        assert!(lenstra_chain_search(0, 11, &fz).is_err());
    }

    #[test]
    fn erdos_single_m() {
        let fz = Factorizer::default();
        let half = ExactRatio::new(1u32, 2u32);
        let r = erdos_sampler(2, &half, 12, 12, &fz, 1, 10).unwrap();
        assert_eq!(r.applicable, 1);
        assert_eq!(r.violating, 0);
        // a prime m has s(m) = 1 and is inapplicable for k = 2
        let r = erdos_sampler(2, &half, 13, 13, &fz, 1, 10).unwrap();
        assert_eq!(r.inapplicable, 1);
        assert!(erdos_sampler(2, &ExactRatio::one(), 2, 10, &fz, 1, 10).is_err());
    }

    #[test]
    fn eq1_examples() {
        let fz = Factorizer::default();
        let six = eq1_check(&b(6), &fz).unwrap();
        assert_eq!((six.lhs.to_string(), six.rhs.to_string(), six.holds), ("7/3".into(), "3/1".into(), true));
        let p28 = eq1_check(&b(28), &fz).unwrap();
        assert_eq!((p28.lhs.to_string(), p28.rhs.to_string(), p28.holds), ("15/7".into(), "3/1".into(), true));
        assert!(matches!(eq1_check(&b(1), &fz), Err(Error::NotMultiperfect(_))));
        assert!(matches!(eq1_check(&b(12), &fz), Err(Error::NotMultiperfect(_))));
    }
}
