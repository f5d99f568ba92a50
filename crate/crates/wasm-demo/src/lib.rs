//! Browser bindings. Every entry point returns a JSON string so the page
//! needs no generated type glue; errors come back as `{"error": "..."}`.

use cellprobe::brackets::walk_reduction;
use cellprobe::entropy_sum::{entropy_sum_witness, show_ratio, BitSource};
use cellprobe::stretcher::{find_stretcher, StretcherResult};
use num_traits::ToPrimitive;
use serde_json::{json, Value};
use wasm_bindgen::prelude::wasm_bindgen;

/// Longest window the ballot curve enumerates.
pub const MAX_CURVE_D: usize = 20;

fn respond(result: Result<Value, String>) -> String {
    match result {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e }).to_string(),
    }
}

/// Unmatched-bracket probability p(d), via the ballot walk, and sqrt(d) p(d) for d = 1..=max_d.
pub fn ballot_curve_value(max_d: usize) -> Result<Value, String> {
    if max_d == 0 || max_d > MAX_CURVE_D {
        return Err(format!("d must lie in 1..={MAX_CURVE_D}"));
    }
    let mut points = Vec::new();
    for d in 1..=max_d {
        let open = walk_reduction(d).map_err(|e| e.to_string())?;
        let p = open.to_f64().unwrap_or(f64::NAN);
        points.push(json!({
            "d": d,
            "open": show_ratio(&open),
            "p": p,
            "scaled": (d as f64).sqrt() * p,
        }));
    }
    Ok(json!({ "points": points }))
}

#[wasm_bindgen]
pub fn ballot_curve(max_d: usize) -> String {
    respond(ballot_curve_value(max_d))
}

/// Threshold and tail probabilities for uniform bits with a prefix of
/// length p, a gap of l bits and a window of d bits.
pub fn entropy_sum_value(p: usize, ell: usize, d: usize, c: f64) -> Result<Value, String> {
    if ell == 0 || d == 0 {
        return Err("l and d must be positive".into());
    }
    let (i, j) = (p + ell, p + ell + d);
    let w = entropy_sum_witness(BitSource::Uniform(j), p, i, j, c).map_err(|e| e.to_string())?;
    Ok(json!({
        "n": w.n, "p": w.p, "i": w.i, "j": w.j,
        "t": w.t, "s": w.s, "s_prime": w.s_prime,
        "p_upper": show_ratio(&w.p_upper),
        "p_lower": show_ratio(&w.p_lower),
        "p_joint": show_ratio(&w.p_joint),
        "upper_holds": w.upper_holds(),
        "lower_holds": w.lower_holds(),
        "joint_holds": w.joint_holds(),
        "spacing_holds": w.spacing_holds(),
    }))
}

#[wasm_bindgen]
pub fn entropy_sum(p: usize, ell: usize, d: usize, c: f64) -> String {
    respond(entropy_sum_value(p, ell, d, c))
}

/// Runs the stretcher on comma- or space-separated ascending indices.
pub fn stretch_value(indices: &str, n: usize, c: f64) -> Result<Value, String> {
    let idx: Vec<usize> = indices
        .split(|ch: char| ch == ',' || ch.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| format!("not an index: {s}")))
        .collect::<Result<_, _>>()?;
    let r = find_stretcher(&idx, n, c).map_err(|e| e.to_string())?;
    let pairs: Vec<Value> = r
        .pairs
        .iter()
        .map(|p| json!({ "start": p.start, "first": p.first, "second": p.second, "ratio": p.ratio() }))
        .collect();
    Ok(json!({
        "window": r.window,
        "v_prime": r.v_prime,
        "pairs": pairs,
        "guaranteed": StretcherResult::guaranteed_len(idx.len(), n, c),
        "gaps_hold": r.gaps_hold(),
    }))
}

#[wasm_bindgen]
pub fn stretch(indices: &str, n: usize, c: f64) -> String {
    respond(stretch_value(indices, n, c))
}
