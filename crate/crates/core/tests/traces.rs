use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sigma_lab::arith::{abundancy, aliquot, factor_u64, sigma};
use sigma_lab::congruence::{smallest_k_divisibility, CongruenceStatus};
use sigma_lab::iterate::{
    gcd_sequence_of, iterate_aliquot, iterate_sigma, lenstra_chain_search, ratio_sequence_of, AliquotStatus,
    SigmaStatus,
};
use sigma_lab::multiperfect::multiperfect_scan;
use sigma_lab::Factorizer;

fn big(n: u64) -> BigUint {
    BigUint::from(n)
}

#[test]
fn sigma_traces_rederive_from_stored_factorizations() {
    let fz = Factorizer::default();
    for n in 2..=150u64 {
        let t = iterate_sigma(&big(n), 25, &fz).unwrap();
        assert_eq!(t.status, SigmaStatus::Complete);
        for w in t.entries.windows(2) {
            let f = w[0].factorization.as_ref().expect("narrow values keep factorizations");
            assert_eq!(f.value(), &w[0].value);
            assert_eq!(sigma(f), w[1].value, "n = {n}, k = {}", w[0].k);
            assert_eq!(&w[1].value % n, w[1].residue_mod_start);
        }
    }
}

#[test]
fn gcd_sequence_is_nonincreasing_and_divides_start() {
    let fz = Factorizer::default();
    for n in 2..=120u64 {
        let t = iterate_sigma(&big(n), 15, &fz).unwrap();
        let g = gcd_sequence_of(&t);
        for w in g.values.windows(2) {
            assert!(w[1] <= w[0] && (&w[0] % &w[1]).is_zero(), "n = {n}");
        }
        assert!(g.values.iter().all(|v| (big(n) % v).is_zero()));
    }
}

#[test]
fn ratio_sequence_matches_abundancy_of_each_entry() {
    let fz = Factorizer::default();
    for n in [2u64, 6, 12, 28, 60, 97] {
        let t = iterate_sigma(&big(n), 10, &fz).unwrap();
        let r = ratio_sequence_of(&t);
        for (ratio, entry) in r.ratios.iter().zip(&t.entries) {
            let f = factor_u64(entry.value.to_u64().unwrap());
            assert_eq!(ratio, &abundancy(&f));
        }
    }
}

#[test]
fn divisibility_search_agrees_with_trace_residues() {
    let fz = Factorizer::default();
    for n in 2..=200u64 {
        let report = smallest_k_divisibility(&big(n), 60, &fz).unwrap();
        let t = iterate_sigma(&big(n), 60, &fz).unwrap();
        let from_trace = t.entries.iter().skip(1).find(|e| e.residue_mod_start.is_zero()).map(|e| e.k);
        assert_eq!(report.smallest_k, from_trace, "n = {n}");
        let expected =
            if from_trace.is_some() { CongruenceStatus::Resolved } else { CongruenceStatus::NoKWithinHorizon };
        assert_eq!(report.status, expected);
    }
}

#[test]
fn reported_aliquot_cycles_repeat() {
    let fz = Factorizer::default();
    for n in [6u64, 28, 220, 1184, 12496, 95, 25, 138] {
        let t = iterate_aliquot(&big(n), 200, &fz).unwrap();
        if let AliquotStatus::Cycle(c) = t.status {
            let last = t.entries.last().unwrap().value.clone();
            let mut v = last.clone();
            for _ in 0..c {
                v = aliquot(&factor_u64(v.to_u64().unwrap()));
            }
            assert_eq!(v, last, "n = {n}");
        }
    }
    assert_eq!(iterate_aliquot(&big(220), 10, &fz).unwrap().status, AliquotStatus::Cycle(2));
    assert_eq!(iterate_aliquot(&big(12496), 10, &fz).unwrap().status, AliquotStatus::Cycle(5));
}

/// Exhaustive oracle: the smallest m whose aliquot iterates rise k times.
fn rising_oracle(k: u32) -> u64 {
    (1u64..)
        .find(|&m| {
            let mut v = m;
            (0..k).all(|_| {
                if v == 0 {
                    return false;
                }
                let d: u64 = (1..v).filter(|d| v % d == 0).sum();
                let ok = d > v;
                v = d;
                ok
            })
        })
        .unwrap()
}

#[test]
fn lenstra_search_matches_exhaustive_oracle() {
    let fz = Factorizer::default();
    for k in 1..=3 {
        let found = lenstra_chain_search(k, 1_000_000, &fz).unwrap().unwrap();
        assert_eq!(found.start(), &big(rising_oracle(k)), "k = {k}");
    }
    assert_eq!(rising_oracle(1), 12);
    assert_eq!(rising_oracle(2), 24);
}

#[test]
fn lenstra_result_is_minimal_on_random_smaller_m() {
    let fz = Factorizer::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for k in 1..=5u32 {
        let found = lenstra_chain_search(k, 1_000_000, &fz).unwrap().unwrap();
        let m0 = found.start().to_u64().unwrap();
        for _ in 0..100 {
            let m = rng.gen_range(1..m0);
            let mut v = m;
            let rises = (0..k).all(|_| {
                let next = if v == 0 { 0 } else { aliquot(&factor_u64(v)).to_u64().unwrap() };
                let ok = next > v;
                v = next;
                ok
            });
            assert!(!rises, "m = {m} rises for k = {k}");
        }
    }
}

#[test]
fn multiperfect_scan_matches_naive_divisor_sums() {
    let limit = 10_000u64;
    let mut sums = vec![0u64; limit as usize + 1];
    for d in 1..=limit as usize {
        for m in (d..=limit as usize).step_by(d) {
            sums[m] += d as u64;
        }
    }
    let naive: Vec<u64> = (2..=limit).filter(|&n| sums[n as usize].is_multiple_of(n)).collect();
    let scanned: Vec<u64> = multiperfect_scan(limit as u32, 3).unwrap().iter().map(|r| r.n.to_u64().unwrap()).collect();
    assert_eq!(scanned, naive);
    for r in multiperfect_scan(limit as u32, 1).unwrap() {
        assert_eq!(sigma(&r.factorization), &r.index * &r.n);
    }
}
