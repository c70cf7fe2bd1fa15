//! Shared factorization front end for the iteration and scan code.
//!
//! A [`Factorizer`] carries the budget, an in-process memo that is shared
//! by every clone (and so by every scan worker), and optionally a persistent
//! [`FactorCache`]. Memo entries remember the probe work that produced them
//! and replay that charge on every hit, so a trace's budget accounting does
//! not depend on which worker happened to factor a value first. Entries that
//! come from the on-disk cache cost nothing.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::arith::{factor_metered, sigma_prime_power, Budget, Factorization, WorkMeter};
use crate::error::{Error, Result};
use crate::store::FactorCache;

/// Values below this are cheap enough that memoizing them is a loss.
const MEMO_FLOOR: u64 = 1 << 32;
const MEMO_CAPACITY: usize = 1 << 20;

/// Default digit width above which traces keep values only.
pub const TRACE_FACTOR_DIGITS: usize = 120;

#[derive(Default)]
struct Memo {
    entries: RwLock<HashMap<BigUint, (Factorization, u64)>>,
}

#[derive(Clone)]
pub struct Factorizer {
    budget: Budget,
    trace_factor_digits: usize,
    memo: Arc<Memo>,
    cache: Option<Arc<FactorCache>>,
}

impl Default for Factorizer {
    fn default() -> Self {
        Factorizer::new(Budget::default())
    }
}

impl std::fmt::Debug for Factorizer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Factorizer")
            .field("budget", &self.budget)
            .field("trace_factor_digits", &self.trace_factor_digits)
            .field("cache", &self.cache.as_ref().map(|c| c.len()))
            .finish()
    }
}

impl Factorizer {
    pub fn new(budget: Budget) -> Self {
        Factorizer { budget, trace_factor_digits: TRACE_FACTOR_DIGITS, memo: Arc::default(), cache: None }
    }

    pub fn with_cache(mut self, cache: Arc<FactorCache>) -> Self {
        self.cache = Some(cache);
        self
    }

    pub fn with_trace_factor_digits(mut self, digits: usize) -> Self {
        self.trace_factor_digits = digits;
        self
    }

    /// Same memo and cache, different budget.
    pub fn with_budget(&self, budget: Budget) -> Self {
        Factorizer { budget, ..self.clone() }
    }

    pub fn budget(&self) -> &Budget {
        &self.budget
    }

    pub fn trace_factor_digits(&self) -> usize {
        self.trace_factor_digits
    }

    pub fn cache(&self) -> Option<&Arc<FactorCache>> {
        self.cache.as_ref()
    }

    /// A fresh meter for one trace or one standalone request.
    pub fn meter(&self) -> WorkMeter {
        WorkMeter::new(&self.budget)
    }

    /// Factors a single value with its own meter.
    pub fn factor(&self, n: &BigUint) -> Result<Factorization> {
        let mut meter = self.meter();
        self.factor_with(n, &mut meter)
    }

    /// Factors `n`, charging `meter`.
    pub fn factor_with(&self, n: &BigUint, meter: &mut WorkMeter) -> Result<Factorization> {
        let memoize = n.to_u64().is_none_or(|v| v >= MEMO_FLOOR);
        if !memoize {
            return factor_metered(n, self.budget.max_digits, meter);
        }
        if let Some((f, cost)) = self.memo.entries.read().expect("memo lock").get(n).cloned() {
            if !meter.charge(cost) {
                return Err(Error::BudgetExhausted { cofactor: n.clone(), work: meter.used() });
            }
            return Ok(f);
        }
        if let Some(f) = self.cache.as_ref().and_then(|c| c.lookup_loaded(n)) {
            return Ok(f);
        }
        let before = meter.used();
        let f = factor_metered(n, self.budget.max_digits, meter)?;
        let cost = meter.used() - before;
        let memoized = {
            let mut entries = self.memo.entries.write().expect("memo lock");
            entries.len() < MEMO_CAPACITY && entries.insert(n.clone(), (f.clone(), cost)).is_none()
        };
        // a value persisted mid-run must also be in the memo, or a later
        // lookup would see it at zero cost
        if let (true, Some(cache)) = (memoized, &self.cache) {
            // the cache is an accelerator; a failed write never fails the computation
            let _ = cache.insert(&f);
        }
        Ok(f)
    }

    /// Factorization of σ(n), assembled from the factorizations of the
    /// individual σ(p^e) terms rather than of σ(n) as a whole.
    pub fn factor_sigma(&self, f: &Factorization, meter: &mut WorkMeter) -> Result<Factorization> {
        let mut acc = Factorization::one();
        for part in f.parts() {
            let term = sigma_prime_power(part);
            acc = acc.multiply(&self.factor_with(&term, meter)?);
        }
        Ok(acc)
    }
}
