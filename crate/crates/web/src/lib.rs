//! wasm-bindgen front end for `www/index.html`.
//!
//! Every export takes plain numbers plus a JSON mode list and returns a JSON
//! string; errors become JS exceptions carrying the message. Mode lists are
//! `[[degree, index, coefficient], ...]`, with n = 2 coefficients multiplying
//! cos sθ (index 0) and sin sθ (index 1), and n = 3 coefficients multiplying
//! orthonormal harmonics.

use std::f64::consts::PI;

use rsv_core::geometry::{PerturbationField, StarDomain};
use rsv_core::oracle::{sweep_row, DEFAULT_FD_H};
use rsv_core::radial::BallProblem;
use rsv_core::special::HarmonicExpansion;
use rsv_core::variations::{
    classify_torsion_sign, pi_multiple, second_variation_eigenvalue_ball, second_variation_energy_ball,
};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

type Res<T> = std::result::Result<T, String>;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

pub fn parse_modes(n: usize, modes: &str) -> Res<HarmonicExpansion> {
    let list: Vec<(usize, usize, f64)> = serde_json::from_str(modes).map_err(|e| format!("mode list: {e}"))?;
    let scale = if n == 2 { PI.sqrt() } else { 1.0 };
    let mut e = HarmonicExpansion::zero(n);
    for (s, i, c) in list {
        e.add_term(s, i, scale * c).map_err(err)?;
    }
    if e.is_zero() {
        return Err("mode list is empty".into());
    }
    Ok(e)
}

fn problem(n: usize, radius: f64, alpha: f64, kind: &str) -> Res<BallProblem> {
    match kind {
        "torsion" => BallProblem::torsion(n, radius, alpha),
        "robin-eigen" => BallProblem::robin_eigen(n, radius, alpha),
        other => return Err(format!("unknown kind {other:?}; expected torsion or robin-eigen")),
    }
    .map_err(err)
}

pub fn second_variation_value(n: usize, radius: f64, alpha: f64, kind: &str, modes: &str) -> Res<Value> {
    let p = problem(n, radius, alpha, kind)?;
    let normal = parse_modes(n, modes)?;
    let s = p.solve().map_err(err)?;
    let r = if kind == "torsion" {
        second_variation_energy_ball(&p, &s, &normal)
    } else {
        second_variation_eigenvalue_ball(&p, &s, &normal)
    }
    .map_err(err)?;
    let value = r.lambda_ddot.unwrap_or(r.eddot0);
    Ok(json!({
        "kind": kind,
        "value": value,
        "symbolic": pi_multiple(value),
        "E0": r.e0,
        "lambda": r.lambda,
        "Sddot0": r.sddot0,
        "F": r.f_series,
        "k_g": r.k_g,
        "bound_i": r.bound_i,
        "bound_ii": r.bound_ii,
        "classification": r.classification.name(),
        "checks_pass": r.all_pass(),
        "modes": r.modes.iter().map(|m| json!({
            "degree": m.degree, "norm_squared": m.norm_squared, "mu": m.mu, "eddot": m.eddot,
        })).collect::<Vec<_>>(),
    }))
}

/// Boundary r(θ) of the perturbed disk at parameter t, as (x, y) pairs.
pub fn boundary_value(radius: f64, modes: &str, t: f64, samples: usize) -> Res<Value> {
    let normal = parse_modes(2, modes)?.without_mean();
    let field = PerturbationField::volume_preserving(2, radius, normal).map_err(err)?;
    let d = StarDomain::from_field(&field, t).map_err(err)?;
    let pts: Vec<[f64; 2]> = (0..samples.max(3))
        .map(|k| {
            let th = 2.0 * PI * k as f64 / samples.max(3) as f64;
            let r = d.radius_at(th, 0.0);
            [r * th.cos(), r * th.sin()]
        })
        .collect();
    Ok(json!({ "t": t, "points": pts }))
}

/// Oracle torsion energies E(t) on t ∈ [-t_max, t_max] next to the parabola
/// E(0) + t²Ë(0)/2.
pub fn energy_sweep_value(radius: f64, alpha: f64, modes: &str, t_max: f64, steps: usize, oracle_modes: usize) -> Res<Value> {
    let p = problem(2, radius, alpha, "torsion")?;
    let normal = parse_modes(2, modes)?.without_mean();
    let s = p.solve().map_err(err)?;
    let r = second_variation_energy_ball(&p, &s, &normal).map_err(err)?;
    let field = PerturbationField::volume_preserving(2, radius, normal).map_err(err)?;
    let steps = steps.max(2);
    let mut rows = Vec::with_capacity(steps);
    for k in 0..steps {
        let t = t_max * (2.0 * k as f64 / (steps - 1) as f64 - 1.0);
        let row = sweep_row(&field, &p, t, oracle_modes).map_err(err)?;
        rows.push(json!({
            "t": t,
            "E": row.energy,
            "parabola": r.e0 + 0.5 * t * t * r.eddot0,
            "residual": row.residual,
        }));
    }
    Ok(json!({ "E0": r.e0, "Eddot0": r.eddot0, "fd_h": DEFAULT_FD_H, "rows": rows }))
}

pub fn classify_value(n: usize, radius: f64, alpha: f64, depth: usize) -> Res<Value> {
    let c = classify_torsion_sign(n, radius, alpha, depth, 0).map_err(err)?;
    Ok(json!({
        "classification": c.classification.name(),
        "consistent": c.consistent(),
        "scanned": c.scanned.iter().map(|w| json!({ "degree": w.degree, "eddot": w.eddot })).collect::<Vec<_>>(),
    }))
}

fn to_js(v: Res<Value>) -> Result<String, JsValue> {
    v.map(|v| v.to_string()).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn second_variation(n: usize, radius: f64, alpha: f64, kind: &str, modes: &str) -> Result<String, JsValue> {
    to_js(second_variation_value(n, radius, alpha, kind, modes))
}

#[wasm_bindgen]
pub fn boundary(radius: f64, modes: &str, t: f64, samples: usize) -> Result<String, JsValue> {
    to_js(boundary_value(radius, modes, t, samples))
}

#[wasm_bindgen]
pub fn energy_sweep(radius: f64, alpha: f64, modes: &str, t_max: f64, steps: usize, oracle_modes: usize) -> Result<String, JsValue> {
    to_js(energy_sweep_value(radius, alpha, modes, t_max, steps, oracle_modes))
}

#[wasm_bindgen]
pub fn classify(n: usize, radius: f64, alpha: f64, depth: usize) -> Result<String, JsValue> {
    to_js(classify_value(n, radius, alpha, depth))
}
