//! Budgeted integer factorization.
//!
//! Trial division by every prime below [`TRIAL_BOUND`] strips the small
//! factors; whatever cofactor remains is split by Brent's variant of Pollard
//! rho and, for multiword cofactors that resist rho, by the elliptic curve
//! method. Each rho iteration or curve multiplication is one probe step
//! charged to a [`WorkMeter`], so a caller can bound the total work spent on a
//! value or on a whole trace. Probing is deterministic (fixed start points and
//! curve seeds), so the same input and allowance always produce the same
//! outcome.

use std::sync::OnceLock;

use num_bigint::BigUint;
use num_integer::{Integer, Roots};
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::arith::ecm::ecm_split;
use crate::arith::factorization::{Factorization, PrimePower};
use crate::arith::primality::{is_prime, is_prime_u64, mul_mod_u64};
use crate::error::{Error, Result};

/// Primes below this bound are removed by trial division.
pub const TRIAL_BOUND: u32 = 100_000;

const GCD_BATCH: u64 = 128;
/// Rho steps spent on a multiword cofactor before switching to ECM.
const RHO_SHARE: u64 = 1 << 20;

/// Limits on a factorization attempt.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Budget {
    /// Probe steps allowed.
    pub max_work: u64,
    /// Values with more decimal digits are refused outright.
    pub max_digits: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_work: 10_000_000, max_digits: 2000 }
    }
}

impl Budget {
    pub fn new(max_work: u64, max_digits: usize) -> Result<Self> {
        if max_work == 0 || max_digits == 0 {
            return Err(Error::PreconditionViolated("budget fields must be positive".into()));
        }
        Ok(Budget { max_work, max_digits })
    }

    /// Same digit cap, `factor` times the work.
    pub fn scaled(&self, factor: u64) -> Self {
        Budget { max_work: self.max_work.saturating_mul(factor), max_digits: self.max_digits }
    }
}

/// Running count of probe steps against a budget.
#[derive(Clone, Debug)]
pub struct WorkMeter {
    limit: u64,
    used: u64,
}

impl WorkMeter {
    pub fn new(budget: &Budget) -> Self {
        WorkMeter { limit: budget.max_work, used: 0 }
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    pub fn remaining(&self) -> u64 {
        self.limit.saturating_sub(self.used)
    }

    /// Records `steps`; false once the limit is crossed.
    pub fn charge(&mut self, steps: u64) -> bool {
        self.used = self.used.saturating_add(steps);
        self.used <= self.limit
    }
}

pub(crate) fn small_primes() -> &'static [u32] {
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let bound = TRIAL_BOUND as usize;
        let mut composite = vec![false; bound];
        let mut out = Vec::new();
        for i in 2..bound {
            if !composite[i] {
                out.push(i as u32);
                let mut j = i * i;
                while j < bound {
                    composite[j] = true;
                    j += i;
                }
            }
        }
        out
    })
}

/// Number of decimal digits in `n` (1 for zero).
pub fn decimal_digits(n: &BigUint) -> usize {
    if n.is_zero() {
        return 1;
    }
    n.to_str_radix(10).len()
}

fn check_digits(n: &BigUint, limit: usize) -> Result<()> {
    // 3.33 bits per digit: anything this wide is certainly over the cap
    let bits = n.bits() as usize;
    if bits > (limit + 1) * 10 / 3 + 4 {
        return Err(Error::DigitLimit { digits: bits * 3 / 10, limit });
    }
    let digits = decimal_digits(n);
    if digits > limit {
        return Err(Error::DigitLimit { digits, limit });
    }
    Ok(())
}

/// Factors `n` within `budget`.
pub fn factor(n: &BigUint, budget: &Budget) -> Result<Factorization> {
    let mut meter = WorkMeter::new(budget);
    factor_metered(n, budget.max_digits, &mut meter)
}

/// Convenience for machine-sized inputs.
pub fn factor_u64(n: u64) -> Factorization {
    assert!(n > 0, "factor_u64 requires n >= 1");
    let mut parts = Vec::new();
    let rest = trial_divide_u64(n, &mut parts);
    let mut meter = WorkMeter { limit: u64::MAX, used: 0 };
    if rest > 1 {
        split_u64(rest, &mut parts, &mut meter).expect("unbounded meter");
    }
    Factorization::from_prime_parts(parts)
}

/// Factors `n`, charging rho iterations to `meter`.
pub fn factor_metered(n: &BigUint, max_digits: usize, meter: &mut WorkMeter) -> Result<Factorization> {
    if n.is_zero() {
        return Err(Error::PreconditionViolated("cannot factor 0".into()));
    }
    check_digits(n, max_digits)?;
    let mut parts = Vec::new();
    if let Some(small) = n.to_u64() {
        let rest = trial_divide_u64(small, &mut parts);
        if rest > 1 {
            split_u64(rest, &mut parts, meter)?;
        }
    } else {
        let rest = trial_divide_big(n.clone(), &mut parts);
        if !rest.is_one() {
            split_big(rest, &mut parts, meter)?;
        }
    }
    Ok(Factorization::from_prime_parts(parts))
}

fn trial_divide_u64(mut n: u64, parts: &mut Vec<PrimePower>) -> u64 {
    for &p in small_primes() {
        let p = p as u64;
        if p * p > n {
            break;
        }
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            parts.push(PrimePower::new(p, e));
        }
    }
    // a leftover below the trial bound squared has no remaining small factor
    if n > 1 && n < (TRIAL_BOUND as u64).pow(2) {
        parts.push(PrimePower::new(n, 1));
        return 1;
    }
    n
}

fn trial_divide_big(mut n: BigUint, parts: &mut Vec<PrimePower>) -> BigUint {
    for (i, &p) in small_primes().iter().enumerate() {
        if let Some(small) = n.to_u64() {
            let mut tail = Vec::new();
            let rest = trial_divide_u64_from(small, i, &mut tail);
            parts.extend(tail);
            return BigUint::from(rest);
        }
        if (&n % p).is_zero() {
            let mut e = 0;
            while (&n % p).is_zero() {
                n /= p;
                e += 1;
            }
            parts.push(PrimePower::new(p, e));
        }
    }
    n
}

fn trial_divide_u64_from(mut n: u64, start: usize, parts: &mut Vec<PrimePower>) -> u64 {
    for &p in &small_primes()[start..] {
        let p = p as u64;
        if p * p > n {
            break;
        }
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            parts.push(PrimePower::new(p, e));
        }
    }
    if n > 1 && n < (TRIAL_BOUND as u64).pow(2) {
        parts.push(PrimePower::new(n, 1));
        return 1;
    }
    n
}

/// `n` has no prime factor below the trial bound.
fn split_u64(n: u64, parts: &mut Vec<PrimePower>, meter: &mut WorkMeter) -> Result<()> {
    let mut stack = vec![n];
    while let Some(m) = stack.pop() {
        if m == 1 {
            continue;
        }
        if m < (TRIAL_BOUND as u64).pow(2) || is_prime_u64(m) {
            parts.push(PrimePower::new(m, 1));
            continue;
        }
        let root = m.sqrt();
        if root * root == m {
            stack.push(root);
            stack.push(root);
            continue;
        }
        let cube = m.cbrt();
        if cube * cube * cube == m {
            stack.extend([cube, cube, cube]);
            continue;
        }
        let d = rho_split_u64(m, meter)?;
        stack.push(d);
        stack.push(m / d);
    }
    Ok(())
}

fn rho_split_u64(n: u64, meter: &mut WorkMeter) -> Result<u64> {
    let exhausted = |meter: &WorkMeter| Error::BudgetExhausted { cofactor: n.into(), work: meter.used() };
    for c in 1u64.. {
        match brent_u64(n, c, meter) {
            Some(Some(d)) => return Ok(d),
            Some(None) => continue,
            None => return Err(exhausted(meter)),
        }
    }
    unreachable!()
}

/// Outer None: budget gone. Inner None: this increment failed.
fn brent_u64(n: u64, c: u64, meter: &mut WorkMeter) -> Option<Option<u64>> {
    let f = |x: u64| (mul_mod_u64(x, x, n) + c) % n;
    let mut y = 2u64;
    let mut x;
    let mut ys = y;
    let mut q = 1u64;
    let mut g = 1u64;
    let mut r = 1u64;
    loop {
        x = y;
        for _ in 0..r {
            y = f(y);
        }
        if !meter.charge(r) {
            return None;
        }
        let mut k = 0;
        while k < r && g == 1 {
            ys = y;
            let steps = GCD_BATCH.min(r - k);
            for _ in 0..steps {
                y = f(y);
                q = mul_mod_u64(q, x.abs_diff(y), n);
            }
            if !meter.charge(steps) {
                return None;
            }
            g = q.gcd(&n);
            k += steps;
        }
        if g != 1 {
            break;
        }
        r *= 2;
    }
    if g == n {
        loop {
            ys = f(ys);
            if !meter.charge(1) {
                return None;
            }
            g = x.abs_diff(ys).gcd(&n);
            if g != 1 {
                break;
            }
        }
    }
    Some((g != n).then_some(g))
}

fn split_big(n: BigUint, parts: &mut Vec<PrimePower>, meter: &mut WorkMeter) -> Result<()> {
    let mut stack = vec![n];
    while let Some(m) = stack.pop() {
        if m.is_one() {
            continue;
        }
        if let Some(small) = m.to_u64() {
            split_u64(small, parts, meter)?;
            continue;
        }
        if is_prime(&m) {
            parts.push(PrimePower::new(m, 1));
            continue;
        }
        if let Some((root, k)) = perfect_power(&m) {
            for _ in 0..k {
                stack.push(root.clone());
            }
            continue;
        }
        let d = rho_split_big(&m, meter)?;
        let other = &m / &d;
        stack.push(d);
        stack.push(other);
    }
    Ok(())
}

/// Largest k with `n = r^k`, when k ≥ 2. Only roots of at least the trial
/// bound are possible for cofactors, which caps k.
fn perfect_power(n: &BigUint) -> Option<(BigUint, u32)> {
    let max_k = (n.bits() / 16) as u32;
    for k in (2..=max_k.max(2)).rev() {
        let r = n.nth_root(k);
        if num_traits::Pow::pow(&r, k) == *n {
            return Some((r, k));
        }
    }
    None
}

/// Rho gets the first [`RHO_SHARE`] steps, ECM whatever is left.
fn rho_split_big(n: &BigUint, meter: &mut WorkMeter) -> Result<BigUint> {
    let mut rho = WorkMeter { limit: meter.remaining().min(RHO_SHARE), used: 0 };
    let mut found = None;
    for c in 1u64.. {
        match brent_big(n, c, &mut rho) {
            Some(Some(d)) => {
                found = Some(d);
                break;
            }
            Some(None) => continue,
            None => break,
        }
    }
    let within = meter.charge(rho.used);
    if let Some(d) = found {
        return Ok(d);
    }
    if within {
        if let Some(d) = ecm_split(n, meter) {
            return Ok(d);
        }
    }
    Err(Error::BudgetExhausted { cofactor: n.clone(), work: meter.used() })
}

fn abs_diff(a: &BigUint, b: &BigUint) -> BigUint {
    if a >= b {
        a - b
    } else {
        b - a
    }
}

fn brent_big(n: &BigUint, c: u64, meter: &mut WorkMeter) -> Option<Option<BigUint>> {
    let c = BigUint::from(c);
    let f = |x: &BigUint| (x * x + &c) % n;
    let mut y = BigUint::from(2u32);
    let mut x;
    let mut ys = y.clone();
    let mut q = BigUint::one();
    let mut g = BigUint::one();
    let mut r = 1u64;
    loop {
        x = y.clone();
        for _ in 0..r {
            y = f(&y);
        }
        if !meter.charge(r) {
            return None;
        }
        let mut k = 0;
        while k < r && g.is_one() {
            ys = y.clone();
            let steps = GCD_BATCH.min(r - k);
            for _ in 0..steps {
                y = f(&y);
                q = (q * abs_diff(&x, &y)) % n;
            }
            if !meter.charge(steps) {
                return None;
            }
            g = q.gcd(n);
            k += steps;
        }
        if !g.is_one() {
            break;
        }
        r *= 2;
    }
    if &g == n {
        loop {
            ys = f(&ys);
            if !meter.charge(1) {
                return None;
            }
            g = abs_diff(&x, &ys).gcd(n);
            if !g.is_one() {
                break;
            }
        }
    }
    Some((&g != n).then_some(g))
}
