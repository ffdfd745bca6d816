//! Browser bindings for the demo page in `www/`.
//!
//! Every exported function returns a flat `Float64Array`; the layout is
//! documented on the native function it wraps.

use hardy_fem::analytic::{u_eps_derivs, CutoffParams, RadialMode};
use hardy_fem::assembly::extend_by_zero;
use hardy_fem::mesh::build_interval_mesh;
use hardy_fem::radial::{radial_solve, RadialKind, RadialProblem};
use wasm_bindgen::prelude::*;

/// Discrete values of a radial problem on `2^k` cells, `k = k_min..=k_max`.
///
/// Layout: `[h, value, reference, value - reference]` per level.
pub fn convergence_data(kind: &str, n: usize, lambda: f64, k_min: u32, k_max: u32) -> Result<Vec<f64>, String> {
    let kind: RadialKind = kind.parse().map_err(|e: hardy_fem::Error| e.to_string())?;
    if k_min > k_max || k_max > 14 {
        return Err(format!("levels must satisfy k_min <= k_max <= 14, got {k_min}..{k_max}"));
    }
    let problem = RadialProblem::new(n, kind, lambda).map_err(|e| e.to_string())?;
    let reference = problem.reference().map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(4 * (k_max - k_min + 1) as usize);
    for k in k_min..=k_max {
        let cells = 1usize << k;
        let sol = radial_solve(&problem, cells, 1.0).map_err(|e| e.to_string())?;
        out.extend([1.0 / cells as f64, sol.value, reference, sol.value - reference]);
    }
    Ok(out)
}

/// Discrete first eigenvector next to the exact eigenfunction, both scaled
/// to 1 at the first vertex `r = h`.
///
/// Layout: `[r, discrete, exact]` per vertex.
pub fn eigenfunction_data(n: usize, lambda: f64, cells: usize) -> Result<Vec<f64>, String> {
    if !(2..=20_000).contains(&cells) {
        return Err(format!("cell count must lie in [2, 20000], got {cells}"));
    }
    let critical = hardy_fem::analytic::hardy_const(n).map_err(|e| e.to_string())?;
    let lambda = lambda.min(critical);
    let problem = if lambda == critical {
        RadialProblem::critical(n)
    } else {
        RadialProblem::subcritical(n, lambda)
    }
    .map_err(|e| e.to_string())?;
    let sol = radial_solve(&problem, cells, 1.0).map_err(|e| e.to_string())?;
    let mesh = build_interval_mesh(cells, 1.0).map_err(|e| e.to_string())?;
    let full = extend_by_zero(&mesh, &sol.vector).map_err(|e| e.to_string())?;
    let mode = RadialMode::new(n, lambda).map_err(|e| e.to_string())?;
    // the exact profile is unbounded at 0 when m < N/2 - 1; scale at the first vertex instead
    let r1 = mesh.vertex(1)[0];
    let (d_scale, e_scale) = (full[1], mode.value(r1));
    let mut out = Vec::with_capacity(3 * mesh.n_vertices());
    for v in 1..mesh.n_vertices() {
        let r = mesh.vertex(v)[0];
        out.extend([r, full[v] / d_scale, mode.value(r) / e_scale]);
    }
    Ok(out)
}

/// The truncated singular profile `u_ε` on a logarithmic grid in `r`.
///
/// Layout: `[r, u, r u']` per sample.
pub fn profile_data(eps: f64, mu: f64, alpha: f64, n: usize, samples: usize) -> Result<Vec<f64>, String> {
    let p = CutoffParams::new(eps, mu, alpha, n).map_err(|e| e.to_string())?;
    if !(2..=100_000).contains(&samples) {
        return Err(format!("sample count must lie in [2, 100000], got {samples}"));
    }
    let lo = (p.inner_radius() * 0.5).ln();
    let hi = 0.0f64;
    let mut out = Vec::with_capacity(3 * samples);
    for i in 0..samples {
        let r = (lo + (hi - lo) * i as f64 / (samples - 1) as f64).exp();
        let (u, du, _) = u_eps_derivs(&p, r);
        out.extend([r, u, r * du]);
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn convergence(kind: &str, n: usize, lambda: f64, k_min: u32, k_max: u32) -> Result<Vec<f64>, JsError> {
    convergence_data(kind, n, lambda, k_min, k_max).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn eigenfunction(n: usize, lambda: f64, cells: usize) -> Result<Vec<f64>, JsError> {
    eigenfunction_data(n, lambda, cells).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn profile(eps: f64, mu: f64, alpha: f64, n: usize, samples: usize) -> Result<Vec<f64>, JsError> {
    profile_data(eps, mu, alpha, n, samples).map_err(|e| JsError::new(&e))
}
