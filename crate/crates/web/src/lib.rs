//! WebAssembly bindings for the browser demo. Each export returns a JSON
//! string; the plain-Rust `*_json` functions behind them are usable natively.

use anisolab_core::gauge::DEFAULT_DIRECTIONS;
use anisolab_core::spaceform::{self, SpaceformBall};
use anisolab_core::{solve_radial_torsion, solve_torsion, triangulate, Gauge, Polygon, SolverOptions};
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Smallest mesh size accepted from the page, to keep solves interactive.
pub const MIN_H: f64 = 0.03;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Wulff shape `{F° ≤ 1}` and unit ball `{F ≤ 1}` of a gauge, sampled along rays.
pub fn wulff_shape_json(gauge: &str, samples: usize) -> Result<String, String> {
    let g: Gauge = gauge.parse().map_err(err)?;
    let info = g.wulff_volume(DEFAULT_DIRECTIONS).map_err(err)?;
    let samples = samples.clamp(8, 2048);
    let ray = |radial: &dyn Fn(&[f64]) -> f64| -> Vec<[f64; 2]> {
        (0..samples)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / samples as f64;
                let d = [t.cos(), t.sin()];
                let r = radial(&d);
                [d[0] / r, d[1] / r]
            })
            .collect()
    };
    Ok(json!({
        "gauge": g.name(),
        "kappa_n": info.kappa_n,
        "omega_k": info.omega_k,
        "wulff": ray(&|d| g.polar(d)),
        "unit_ball": ray(&|d| g.eval(d)),
    })
    .to_string())
}

/// Torsion function of a named domain: mesh, nodal values and summary numbers.
pub fn torsion_field_json(domain: &str, gauge: &str, p: f64, target_h: f64) -> Result<String, String> {
    let g: Gauge = gauge.parse().map_err(err)?;
    let poly = Polygon::from_name(domain).map_err(err)?;
    if !(target_h >= MIN_H) {
        return Err(format!("mesh size must be at least {MIN_H}"));
    }
    let mesh = triangulate(&poly, target_h).map_err(err)?;
    let r = solve_torsion(&mesh, &g, p, &SolverOptions::default()).map_err(err)?;
    Ok(json!({
        "vertices": mesh.vertices(),
        "triangles": mesh.triangles(),
        "values": r.field.values(),
        "torsional_rigidity": r.field.integrate_with(|_, u, _| u),
        "max": r.field.max(),
        "iterations": r.iterations,
        "h_max": mesh.h_max(),
    })
    .to_string())
}

/// Radial torsion profile of a geodesic ball together with its boundary checks.
pub fn spaceform_profile_json(n: usize, kappa: f64, theta: f64) -> Result<String, String> {
    let ball = SpaceformBall::new(n, kappa, theta).map_err(err)?;
    let sol = solve_radial_torsion(&ball).map_err(err)?;
    let stride = (sol.r.len() / 200).max(1);
    let pick = |v: &[f64]| v.iter().step_by(stride).copied().collect::<Vec<_>>();
    let rows = spaceform::sweep(&[n], &[kappa], &[theta], ball.grid, 1.0).map_err(err)?;
    let checks: Vec<_> = rows
        .iter()
        .map(|r| json!({"check": r.check, "lhs": r.lhs, "rhs": r.rhs, "slack": r.slack, "satisfied": r.satisfied}))
        .collect();
    Ok(json!({
        "r": pick(&sol.r),
        "u": pick(&sol.u),
        "u_prime": pick(&sol.u_prime),
        "torsion": sol.torsion,
        "volume": sol.volume,
        "area": sol.area,
        "checks": checks,
    })
    .to_string())
}

#[wasm_bindgen]
pub fn wulff_shape(gauge: &str, samples: usize) -> Result<String, JsValue> {
    wulff_shape_json(gauge, samples).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn torsion_field(domain: &str, gauge: &str, p: f64, target_h: f64) -> Result<String, JsValue> {
    torsion_field_json(domain, gauge, p, target_h).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn spaceform_profile(n: usize, kappa: f64, theta: f64) -> Result<String, JsValue> {
    spaceform_profile_json(n, kappa, theta).map_err(|e| JsValue::from_str(&e))
}
