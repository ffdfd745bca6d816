//! Smallest eigenpair of symmetric pencils `(Q, B)` with `B` positive definite.

use serde::{Deserialize, Serialize};

use crate::analytic::hardy_const;
use crate::assembly::{assemble_form, extend_by_zero, tet_gradients, DofMap, Form, Measure, DEFAULT_TOL};
use crate::error::{invalid, Error, Result};
use crate::mesh::SimplicialMesh;
use crate::par;
use crate::quadrature::{integrate_cell_bary, radial_integrate, SingularWeight};
use crate::sparse::{dot, quadratic_form, Cholesky, SparseSym};

/// Default convergence tolerance on the normwise backward error.
pub const DEFAULT_EIG_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 2000;
const STAGNATION: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigSolution {
    pub value: f64,
    /// `B`-normalized; the first significant component is positive.
    pub vector: Vec<f64>,
    /// `‖Qx - λBx‖₂ / ‖Bx‖₂`.
    pub residual: f64,
    /// `‖Qx - λBx‖∞ / ((‖Q‖∞ + |λ| ‖B‖∞) ‖x‖∞)`, the quantity the stopping test uses.
    pub backward_error: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn inf_norm(a: &SparseSym) -> f64 {
    let mut rows = vec![0.0; a.n()];
    for (i, j, v) in a.triplets() {
        rows[i] += v.abs();
        if i != j {
            rows[j] += v.abs();
        }
    }
    rows.into_iter().fold(0.0, f64::max)
}

fn max_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Smallest eigenvalue of `Q x = λ B x` by shift-invert iteration on
/// `Q + σB`, `σ = 1e-8 trace(B)/n`, accelerated by Rayleigh-Ritz on the span of
/// the current iterate and its image. Starts from the `B`-normalized all-ones
/// vector. Convergence needs the backward error below `tol` and the eigenvalue
/// to stagnate below 1e-13 relative.
pub fn smallest_genevp(q: &SparseSym, b: &SparseSym, tol: f64, max_iterations: usize) -> Result<EigSolution> {
    let n = q.n();
    if b.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: b.n() });
    }
    if n == 0 {
        return Err(invalid("empty pencil"));
    }
    if !(tol > 0.0) {
        return Err(invalid(format!("tolerance must be positive, got {tol}")));
    }
    let sigma = 1e-8 * b.trace() / n as f64;
    let shifted = SparseSym::combine(1.0, q, sigma, b)?;
    let chol = match Cholesky::factor(&shifted) {
        Ok(c) => c,
        Err(e) => {
            // tell apart an indefinite B from an indefinite Q
            Cholesky::factor(b)?;
            return Err(e);
        }
    };
    let (q_norm, b_norm) = (inf_norm(q), inf_norm(b));

    let mut x = vec![1.0; n];
    b_normalize(b, &mut x)?;
    let mut lambda = quadratic_form(q, &x)?;
    let mut best = None;
    for it in 1..=max_iterations {
        let bx = b.mul_vec(&x)?;
        let y = chol.solve(&bx)?;
        x = ritz_step(q, b, &x, &bx, y)?;
        let prev = lambda;
        lambda = quadratic_form(q, &x)?;
        if lambda < -1e-9 {
            return Err(Error::NegativeRayleighQuotient(lambda));
        }
        let (residual, backward) = residuals(q, b, &x, lambda, q_norm, b_norm)?;
        let stagnant = (lambda - prev).abs() <= STAGNATION * lambda.abs();
        let sol = EigSolution {
            value: lambda,
            vector: x.clone(),
            residual,
            backward_error: backward,
            iterations: it,
            converged: backward <= tol && stagnant,
        };
        if sol.converged {
            return Ok(finish(sol));
        }
        best = Some(sol);
    }
    Ok(finish(best.expect("at least one iteration")))
}

fn finish(mut sol: EigSolution) -> EigSolution {
    let scale = max_abs(&sol.vector);
    if let Some(&first) = sol.vector.iter().find(|v| v.abs() > 1e-10 * scale) {
        if first < 0.0 {
            sol.vector.iter_mut().for_each(|v| *v = -*v);
        }
    }
    sol
}

fn b_normalize(b: &SparseSym, x: &mut [f64]) -> Result<()> {
    let nrm2 = quadratic_form(b, x)?;
    if !(nrm2 > 0.0) {
        return Err(Error::NotPositiveDefinite { row: 0, pivot: nrm2 });
    }
    let s = 1.0 / nrm2.sqrt();
    x.iter_mut().for_each(|v| *v *= s);
    Ok(())
}

/// Rayleigh-Ritz on `span{x, y}`; `x` is `B`-normalized and `bx = Bx`.
fn ritz_step(q: &SparseSym, b: &SparseSym, x: &[f64], bx: &[f64], mut y: Vec<f64>) -> Result<Vec<f64>> {
    b_normalize(b, &mut y)?;
    let c = dot(bx, &y);
    let mut z: Vec<f64> = y.iter().zip(x).map(|(yi, xi)| yi - c * xi).collect();
    let zz = quadratic_form(b, &z)?;
    if !(zz > 1e-20) {
        return Ok(y);
    }
    let s = 1.0 / zz.sqrt();
    z.iter_mut().for_each(|v| *v *= s);
    let a11 = quadratic_form(q, x)?;
    let a22 = quadratic_form(q, &z)?;
    let qz = q.mul_vec(&z)?;
    let a12 = dot(x, &qz);
    let half = 0.5 * (a11 - a22);
    let root = half.hypot(a12);
    let lam = 0.5 * (a11 + a22) - root;
    let (v1, v2) = if (lam - a22).abs() >= (lam - a11).abs() {
        (lam - a22, a12)
    } else {
        (a12, lam - a11)
    };
    let nv = v1.hypot(v2);
    if nv == 0.0 {
        return Ok(y);
    }
    let (c1, c2) = (v1 / nv, v2 / nv);
    let mut out: Vec<f64> = x.iter().zip(&z).map(|(xi, zi)| c1 * xi + c2 * zi).collect();
    b_normalize(b, &mut out)?;
    Ok(out)
}

fn residuals(q: &SparseSym, b: &SparseSym, x: &[f64], lambda: f64, qn: f64, bn: f64) -> Result<(f64, f64)> {
    let qx = q.mul_vec(x)?;
    let bx = b.mul_vec(x)?;
    let r: Vec<f64> = qx.iter().zip(&bx).map(|(a, c)| a - lambda * c).collect();
    let rel = dot(&r, &r).sqrt() / dot(&bx, &bx).sqrt();
    let backward = max_abs(&r) / ((qn + lambda.abs() * bn) * max_abs(x));
    Ok((rel, backward))
}

/// Dimension `N` implied by a mesh and measure.
pub fn ambient_dimension(mesh: &SimplicialMesh, measure: Measure) -> Result<usize> {
    match (mesh.dim(), measure) {
        (3, Measure::Lebesgue) => Ok(3),
        (1, Measure::Radial(n)) if n >= 3 => Ok(n),
        (1, Measure::Radial(n)) => Err(Error::Unsupported(format!("radial problems need N >= 3, got {n}"))),
        (1, Measure::Lebesgue) => Err(Error::Unsupported(
            "Hardy-type pencils on a 1D mesh need the radial measure".into(),
        )),
        (d, m) => Err(Error::Unsupported(format!("{m:?} on a {d}D mesh"))),
    }
}

/// `Λ_h`: smallest eigenvalue of `(A, W)`.
pub fn hardy_constant(mesh: &SimplicialMesh, measure: Measure) -> Result<EigSolution> {
    ambient_dimension(mesh, measure)?;
    let a = assemble_form(mesh, Form::Stiffness, measure, DEFAULT_TOL)?;
    let w = assemble_form(mesh, Form::HardyMass, measure, DEFAULT_TOL)?;
    smallest_genevp(&a, &w, DEFAULT_EIG_TOL, DEFAULT_MAX_ITER)
}

/// `μ_1h`: smallest eigenvalue of `(A - Λ_N W, M)`.
pub fn critical_eigen(mesh: &SimplicialMesh, measure: Measure) -> Result<EigSolution> {
    let n = ambient_dimension(mesh, measure)?;
    potential_eigen(mesh, measure, hardy_const(n)?)
}

/// `λ_1h`: smallest eigenvalue of `(A - Λ W, M)` for `0 <= Λ < Λ_N`.
pub fn subcritical_eigen(mesh: &SimplicialMesh, measure: Measure, lambda: f64) -> Result<EigSolution> {
    let n = ambient_dimension(mesh, measure)?;
    let cap = hardy_const(n)?;
    if !(0.0..cap).contains(&lambda) {
        return Err(invalid(format!(
            "subcritical amplitude must satisfy 0 <= Λ < {cap}, got {lambda} (use the critical problem at Λ = {cap})"
        )));
    }
    potential_eigen(mesh, measure, lambda)
}

fn potential_eigen(mesh: &SimplicialMesh, measure: Measure, lambda: f64) -> Result<EigSolution> {
    let a = assemble_form(mesh, Form::Stiffness, measure, DEFAULT_TOL)?;
    let m = assemble_form(mesh, Form::Mass, measure, DEFAULT_TOL)?;
    let q = if lambda == 0.0 {
        a
    } else {
        let w = assemble_form(mesh, Form::HardyMass, measure, DEFAULT_TOL)?;
        SparseSym::combine(1.0, &a, -lambda, &w)?
    };
    smallest_genevp(&q, &m, DEFAULT_EIG_TOL, DEFAULT_MAX_ITER)
}

/// Norms available to [`best_approx_error`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApproxNorm {
    /// `(∫|∇u|²)^{1/2}`
    Energy,
    /// `(∫|∇u|² - Λ_N ∫u²/|x|²)^{1/2}`
    HardyEnergy,
}

/// A function with its gradient, in physical coordinates (`[r]` on 1D meshes).
#[derive(Clone, Copy)]
pub struct Target<'a> {
    pub value: &'a (dyn Fn(&[f64]) -> f64 + Sync),
    pub gradient: &'a (dyn Fn(&[f64]) -> [f64; 3] + Sync),
}

/// Distance from `f` to the P1 space in the chosen norm.
///
/// The minimizer solves the projection's normal equations; the distance is
/// then integrated cell by cell. For the Hardy energy this uses the
/// nonnegative form `∫ |∇e + γ e x/|x|²|²`, `γ = (N-2)/2`, which equals the
/// deficit form for functions vanishing on the boundary.
pub fn best_approx_error(
    mesh: &SimplicialMesh,
    measure: Measure,
    target: Target<'_>,
    norm: ApproxNorm,
    tol: f64,
) -> Result<f64> {
    let n = match (mesh.dim(), measure) {
        (1, Measure::Lebesgue) if norm == ApproxNorm::Energy => 1,
        _ => ambient_dimension(mesh, measure)?,
    };
    let gamma = match norm {
        ApproxNorm::Energy => 0.0,
        ApproxNorm::HardyEnergy => 0.5 * (n as f64 - 2.0),
    };
    let a = assemble_form(mesh, Form::Stiffness, measure, DEFAULT_TOL)?;
    let q = if gamma == 0.0 {
        a
    } else {
        let w = assemble_form(mesh, Form::HardyMass, measure, DEFAULT_TOL)?;
        SparseSym::combine(1.0, &a, -gamma * gamma, &w)?
    };
    let dofs = DofMap::new(mesh);
    let rhs = load_vector(mesh, measure, target, gamma, tol, &dofs)?;
    let coeffs = Cholesky::factor(&q)?.solve(&rhs)?;
    let full = extend_by_zero(mesh, &coeffs)?;
    let err2 = error_integral(mesh, measure, target, gamma, &full, tol)?;
    Ok(err2.max(0.0).sqrt())
}

fn load_vector(
    mesh: &SimplicialMesh,
    measure: Measure,
    target: Target<'_>,
    gamma: f64,
    tol: f64,
    dofs: &DofMap,
) -> Result<Vec<f64>> {
    let g2 = gamma * gamma;
    let locals: Vec<Result<Vec<f64>>> = match mesh.dim() {
        1 => {
            let k = match measure {
                Measure::Lebesgue => 0.0,
                Measure::Radial(n) => n as f64 - 1.0,
            };
            par::map_range(mesh.n_cells(), |c| {
                let cell = mesh.cell(c);
                let (ra, rb) = (mesh.vertex(cell[0])[0], mesh.vertex(cell[1])[0]);
                let h = rb - ra;
                let grad = radial_integrate(|r| (target.gradient)(&[r])[0], ra, rb, k, tol)? / h;
                let mut local = vec![-grad, grad];
                if g2 != 0.0 {
                    let fa = radial_integrate(|r| (target.value)(&[r]) * (rb - r) / h, ra, rb, k - 2.0, tol)?;
                    let fb = radial_integrate(|r| (target.value)(&[r]) * (r - ra) / h, ra, rb, k - 2.0, tol)?;
                    local[0] -= g2 * fa;
                    local[1] -= g2 * fb;
                }
                Ok(local)
            })
        }
        _ => par::map_range(mesh.n_cells(), |c| {
            let p = mesh.cell_points(c);
            let g = tet_gradients(&p);
            let int = integrate_cell_bary(&p, None, 3, tol, |lam, o| {
                let x = phys(&p, lam);
                o.copy_from_slice(&(target.gradient)(&x));
            })?;
            let mut local: Vec<f64> = (0..4).map(|a| int[0] * g[a][0] + int[1] * g[a][1] + int[2] * g[a][2]).collect();
            if g2 != 0.0 {
                let w = integrate_cell_bary(&p, Some(&SingularWeight::inv_sq()), 4, tol, |lam, o| {
                    let f = (target.value)(&phys(&p, lam));
                    for a in 0..4 {
                        o[a] = f * lam[a];
                    }
                })?;
                for a in 0..4 {
                    local[a] -= g2 * w[a];
                }
            }
            Ok(local)
        }),
    };
    let mut rhs = vec![0.0; dofs.n_dofs()];
    for (c, local) in locals.into_iter().enumerate() {
        let local = local?;
        for (a, &v) in mesh.cell(c).iter().enumerate() {
            if let Some(d) = dofs.dof(v) {
                rhs[d] += local[a];
            }
        }
    }
    Ok(rhs)
}

fn phys(p: &[[f64; 3]; 4], lam: &[f64; 4]) -> [f64; 3] {
    std::array::from_fn(|d| (0..4).map(|k| lam[k] * p[k][d]).sum())
}

fn error_integral(
    mesh: &SimplicialMesh,
    measure: Measure,
    target: Target<'_>,
    gamma: f64,
    full: &[f64],
    tol: f64,
) -> Result<f64> {
    let parts: Vec<Result<f64>> = match mesh.dim() {
        1 => {
            let n = match measure {
                Measure::Lebesgue => 1.0,
                Measure::Radial(n) => n as f64,
            };
            par::map_range(mesh.n_cells(), |c| {
                let cell = mesh.cell(c);
                let (ra, rb) = (mesh.vertex(cell[0])[0], mesh.vertex(cell[1])[0]);
                let (va, vb) = (full[cell[0]], full[cell[1]]);
                let h = rb - ra;
                let slope = (vb - va) / h;
                // (r e' + γ e)² r^{N-3}, which reduces to e'² r^{N-1} for γ = 0
                radial_integrate(
                    |r| {
                        let e = (target.value)(&[r]) - (va * (rb - r) + vb * (r - ra)) / h;
                        let de = (target.gradient)(&[r])[0] - slope;
                        let s = r * de + gamma * e;
                        s * s
                    },
                    ra,
                    rb,
                    n - 3.0,
                    tol,
                )
            })
        }
        _ => par::map_range(mesh.n_cells(), |c| {
            let p = mesh.cell_points(c);
            let g = tet_gradients(&p);
            let vals: [f64; 4] = std::array::from_fn(|k| full[mesh.cell(c)[k]]);
            let grad_v: [f64; 3] = std::array::from_fn(|d| (0..4).map(|k| vals[k] * g[k][d]).sum());
            let integrand = |lam: &[f64; 4], o: &mut [f64]| {
                let x = phys(&p, lam);
                let gf = (target.gradient)(&x);
                let de: [f64; 3] = std::array::from_fn(|d| gf[d] - grad_v[d]);
                if gamma == 0.0 {
                    o[0] = de[0] * de[0] + de[1] * de[1] + de[2] * de[2];
                } else {
                    // |x|² |∇e + γ e x/|x|²|², integrated against |x|^{-2}
                    let e = (target.value)(&x) - (0..4).map(|k| lam[k] * vals[k]).sum::<f64>();
                    let s: [f64; 3] = std::array::from_fn(|d| {
                        let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
                        r2.sqrt() * de[d] + gamma * e * x[d] / r2.sqrt()
                    });
                    o[0] = s[0] * s[0] + s[1] * s[1] + s[2] * s[2];
                }
            };
            let w = SingularWeight::inv_sq();
            let weight = if gamma == 0.0 { None } else { Some(&w) };
            Ok(integrate_cell_bary(&p, weight, 1, tol, integrand)?[0])
        }),
    };
    parts.into_iter().sum()
}
