//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each export takes decimal strings and returns a JSON document; errors
//! come back as thrown strings. Everything runs on the calling thread.

use num_bigint::BigUint;
use serde_json::json;
use sigma_lab::arith::factor;
use sigma_lab::congruence::periodicity_probe;
use sigma_lab::iterate::{iterate_aliquot, iterate_sigma};
use sigma_lab::{Budget, Factorizer};
use wasm_bindgen::prelude::*;

/// Caps keep a single call short enough for the UI thread.
const MAX_STEPS: u32 = 500;
const MAX_DIGITS: usize = 60;

fn budget() -> Budget {
    Budget { max_work: 2_000_000, max_digits: 200 }
}

fn parse(n: &str) -> Result<BigUint, String> {
    let n = n.trim();
    if n.is_empty() || n.len() > MAX_DIGITS || !n.bytes().all(|b| b.is_ascii_digit()) {
        return Err(format!("expected a positive integer of at most {MAX_DIGITS} digits"));
    }
    let v: BigUint = n.parse().map_err(|_| "not an integer".to_string())?;
    if v < BigUint::from(2u32) {
        return Err("n must be at least 2".into());
    }
    Ok(v)
}

fn steps(k: u32) -> Result<u32, String> {
    if k == 0 || k > MAX_STEPS {
        return Err(format!("steps must lie in 1..={MAX_STEPS}"));
    }
    Ok(k)
}

pub fn sigma_trace_json(n: &str, k: u32) -> Result<String, String> {
    let fz = Factorizer::new(budget());
    let trace = iterate_sigma(&parse(n)?, steps(k)?, &fz).map_err(|e| e.to_string())?;
    serde_json::to_string(&trace).map_err(|e| e.to_string())
}

pub fn aliquot_trace_json(n: &str, k: u32) -> Result<String, String> {
    let fz = Factorizer::new(budget());
    let trace = iterate_aliquot(&parse(n)?, steps(k)?, &fz).map_err(|e| e.to_string())?;
    serde_json::to_string(&trace).map_err(|e| e.to_string())
}

pub fn periodicity_json(n: &str) -> Result<String, String> {
    let f = factor(&parse(n)?, &budget()).map_err(|e| e.to_string())?;
    let report = periodicity_probe(&f, None).map_err(|e| e.to_string())?;
    let mut v = serde_json::to_value(&report).map_err(|e| e.to_string())?;
    v["factorization"] = json!(f.to_string());
    Ok(v.to_string())
}

/// σ(n), σ²(n), ..., σ^k(n) with residues mod n.
#[wasm_bindgen]
pub fn sigma_trace(n: &str, k: u32) -> Result<String, JsValue> {
    sigma_trace_json(n, k).map_err(JsValue::from)
}

/// s(n), s²(n), ... with cycle and termination detection.
#[wasm_bindgen]
pub fn aliquot_trace(n: &str, k: u32) -> Result<String, JsValue> {
    aliquot_trace_json(n, k).map_err(JsValue::from)
}

/// Period of k ↦ σ_k(n) mod σ(n) against the L invariant.
#[wasm_bindgen]
pub fn periodicity(n: &str) -> Result<String, JsValue> {
    periodicity_json(n).map_err(JsValue::from)
}
