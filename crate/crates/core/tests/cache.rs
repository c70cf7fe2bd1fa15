use std::fs;
use std::io::Write;
use std::sync::Arc;

use num_bigint::BigUint;
use proptest::prelude::*;
use sigma_lab::arith::{factor_u64, Factorization, PrimePower};
use sigma_lab::store::{format_entry, FactorCache};
use sigma_lab::Factorizer;

fn big(n: u64) -> BigUint {
    BigUint::from(n)
}

#[test]
fn entries_survive_a_restart() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("factors.txt");
    {
        let cache = FactorCache::open(&path).unwrap();
        cache.insert(&factor_u64(12)).unwrap();
        cache.insert(&factor_u64(12)).unwrap();
        cache.insert(&factor_u64(1_000_000_007 * 998_244_353)).unwrap();
        cache.flush().unwrap();
    }
    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("12 ")).count(), 1);
    let reopened = FactorCache::open(&path).unwrap();
    assert_eq!(reopened.len(), 2);
    assert_eq!(reopened.lookup(&big(12)).unwrap().to_string(), "2^2 * 3");
    assert!(reopened.lookup_loaded(&big(12)).is_some());
    assert!(reopened.lookup(&big(13)).is_none());
    assert!(reopened.corrupt_entries().is_empty());
}

#[test]
fn corrupt_lines_are_skipped_and_reported() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("factors.txt");
    let mut file = fs::File::create(&path).unwrap();
    // line 2 claims 2^2·3 = 13, line 3 is not a prime factorization, line 4 is noise
    write!(file, "12 2^2 3^1\n13 2^2 3^1\n15 15^1\nnot a line\n28 2^2 7^1\n").unwrap();
    drop(file);
    let cache = FactorCache::open(&path).unwrap();
    let bad: Vec<usize> = cache.corrupt_entries().iter().map(|c| c.line).collect();
    assert_eq!(bad, vec![2, 3, 4]);
    assert_eq!(cache.len(), 2);
    assert!(cache.lookup(&big(13)).is_none());
    assert_eq!(cache.lookup(&big(28)).unwrap(), factor_u64(28));
}

#[test]
fn a_torn_final_line_is_not_trusted_and_appends_stay_intact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("factors.txt");
    fs::write(&path, "12 2^2 3^1\n28 2^2 7").unwrap();
    let cache = FactorCache::open(&path).unwrap();
    assert_eq!(cache.len(), 1);
    assert_eq!(cache.corrupt_entries().len(), 1);
    cache.insert(&factor_u64(496)).unwrap();
    cache.flush().unwrap();
    drop(cache);
    let reopened = FactorCache::open(&path).unwrap();
    assert!(reopened.lookup(&big(496)).is_some());
    assert!(reopened.lookup(&big(12)).is_some());
}

#[test]
fn invalid_factorizations_are_rejected_before_writing() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("factors.txt");
    let cache = FactorCache::open(&path).unwrap();
    assert!(cache.insert_parts(big(13), vec![PrimePower::new(2u32, 2), PrimePower::new(3u32, 1)]).is_err());
    assert!(cache.insert_parts(big(15), vec![PrimePower::new(15u32, 1)]).is_err());
    cache.flush().unwrap();
    assert!(fs::read_to_string(&path).unwrap_or_default().is_empty());
}

#[test]
fn factorizer_reuses_cache_across_runs_with_identical_results() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("factors.txt");
    let n = big(1_000_003) * big(1_000_033) * big(998_244_353) * big(1_000_000_007);
    let first = {
        let cache = Arc::new(FactorCache::open(&path).unwrap());
        let fz = Factorizer::default().with_cache(cache.clone());
        let f = fz.factor(&n).unwrap();
        cache.flush().unwrap();
        f
    };
    let cache = Arc::new(FactorCache::open(&path).unwrap());
    assert!(cache.lookup_loaded(&n).is_some());
    let fz = Factorizer::default().with_cache(cache);
    let mut meter = fz.meter();
    assert_eq!(fz.factor_with(&n, &mut meter).unwrap(), first);
    assert_eq!(meter.used(), 0);
}

#[test]
fn concurrent_readers_see_whole_entries() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("factors.txt");
    let cache = Arc::new(FactorCache::open(&path).unwrap());
    std::thread::scope(|s| {
        let writer = cache.clone();
        s.spawn(move || {
            for n in 2..2000u64 {
                writer.insert(&factor_u64(n)).unwrap();
            }
        });
        for _ in 0..3 {
            let reader = cache.clone();
            s.spawn(move || {
                for n in (2..2000u64).rev() {
                    if let Some(f) = reader.lookup(&big(n)) {
                        assert_eq!(f, factor_u64(n));
                    }
                }
            });
        }
    });
    cache.flush().unwrap();
    let reopened = FactorCache::open(&path).unwrap();
    assert_eq!(reopened.len(), 1998);
    assert!(reopened.corrupt_entries().is_empty());
}

fn arb_factorization() -> impl Strategy<Value = Factorization> {
    proptest::collection::vec((0usize..100, 1u32..6), 0..6).prop_map(|picks| {
        let primes: Vec<u64> = (2u64..).filter(|&p| sigma_lab::arith::is_prime_u64(p)).take(100).collect();
        Factorization::from_parts(picks.into_iter().map(|(i, e)| PrimePower::new(primes[i], e))).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn load_of_save_is_identity(fs_in in proptest::collection::vec(arb_factorization(), 0..40)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("snapshot.txt");
        let cache = FactorCache::in_memory();
        for f in &fs_in {
            cache.insert(f).unwrap();
        }
        cache.save_to(&path).unwrap();
        let loaded = FactorCache::open(&path).unwrap();
        prop_assert_eq!(loaded.entries(), cache.entries());
        prop_assert!(loaded.corrupt_entries().is_empty());
        let text = fs::read_to_string(&path).unwrap();
        let expected: String = cache.entries().iter().map(format_entry).collect();
        prop_assert_eq!(text, expected);
    }
}
