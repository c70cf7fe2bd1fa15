//! Parallel range scans with a deterministic merge.
//!
//! Workers pull indices from a shared counter, so load balances itself when
//! some items are far more expensive than others. Results are re-sorted by
//! index before returning; output never depends on the worker count.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::thread;

/// Worker count when the caller does not choose one.
pub fn default_jobs() -> usize {
    thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Evaluates `f(0..len)` on up to `jobs` threads, returning results in index order.
pub fn par_map_indexed<R, F>(len: usize, jobs: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync,
{
    let jobs = jobs.max(1).min(len.max(1));
    if jobs == 1 {
        return (0..len).map(&f).collect();
    }
    let next = AtomicUsize::new(0);
    let mut tagged: Vec<(usize, R)> = thread::scope(|scope| {
        let handles: Vec<_> = (0..jobs)
            .map(|_| {
                scope.spawn(|| {
                    let mut local = Vec::new();
                    loop {
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        if i >= len {
                            break;
                        }
                        local.push((i, f(i)));
                    }
                    local
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("scan worker panicked")).collect()
    });
    tagged.sort_unstable_by_key(|(i, _)| *i);
    tagged.into_iter().map(|(_, r)| r).collect()
}

/// Maps over the inclusive range `lo..=hi`.
pub fn par_map_range<R, F>(lo: u64, hi: u64, jobs: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(u64) -> R + Sync,
{
    if hi < lo {
        return Vec::new();
    }
    let len = usize::try_from(hi - lo + 1).expect("range fits in memory");
    par_map_indexed(len, jobs, |i| f(lo + i as u64))
}
