//! Reference quantities: the Hardy constant, Bessel functions and their first
//! zeros, the exact first radial eigenfunctions, and the truncated singular
//! profile `u_ε` that saturates the Hardy quotient.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::mesh::AffineCellMap;
use crate::quadrature::{collapsed_tet, gauss_legendre, radial_integrate, radial_integrate_log};

/// `Λ_N = (N-2)^2/4`.
pub fn hardy_const(n: usize) -> Result<f64> {
    if n < 3 {
        return Err(invalid(format!(
            "the Hardy constant is positive only for N >= 3 (N = 2 is the critical case), got {n}"
        )));
    }
    let d = n as f64 - 2.0;
    Ok(d * d / 4.0)
}

const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `Γ(x)` (Lanczos, `g = 7`), with reflection for `x < 1/2`.
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + 7.5;
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}

/// Surface area of the unit sphere in `R^N`, `2π^{N/2}/Γ(N/2)`.
pub fn sphere_area(n: usize) -> f64 {
    2.0 * PI.powf(n as f64 / 2.0) / gamma(n as f64 / 2.0)
}

/// `J_ν(x)` for `ν ∈ [0, 20]`, `x ∈ [0, 100]`.
pub fn bessel_j(nu: f64, x: f64) -> Result<f64> {
    if !(0.0..=20.0).contains(&nu) {
        return Err(invalid(format!("Bessel order must lie in [0, 20], got {nu}")));
    }
    if !(0.0..=100.0).contains(&x) {
        return Err(invalid(format!("Bessel argument must lie in [0, 100], got {x}")));
    }
    Ok(bessel_j_raw(nu, x))
}

fn bessel_j_raw(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    if x <= 5.0 {
        bessel_series(nu, x)
    } else {
        bessel_miller(nu, x)
    }
}

fn bessel_series(nu: f64, x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = (0.5 * x).powf(nu) / gamma(nu + 1.0);
    let mut sum = term;
    for k in 1..200 {
        let kf = k as f64;
        term *= q / (kf * (kf + nu));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// Miller's backward recurrence, normalized by the Neumann series
/// `(x/2)^f = Σ_i c_i J_{f+2i}(x)` with `f` the fractional part of the order.
fn bessel_miller(nu: f64, x: f64) -> f64 {
    let n = nu.floor() as usize;
    let f = nu - n as f64;
    let top = n.max(x.ceil() as usize) + 20 + (10.0 * x.cbrt()).ceil() as usize;
    let top = top + top % 2;
    let (mut jp1, mut j) = (0.0, 1e-300);
    let mut at_n = 0.0;
    let mut norm = 0.0;
    // coefficient c_i of J_{f+2i}
    let coeff = |i: usize| -> f64 {
        if f == 0.0 {
            if i == 0 {
                1.0
            } else {
                2.0
            }
        } else {
            let mut g = gamma(f);
            for k in 0..i {
                g *= (f + k as f64) / (k as f64 + 1.0);
            }
            (f + 2.0 * i as f64) * g
        }
    };
    let mut coeffs = vec![0.0; top / 2 + 1];
    for (i, c) in coeffs.iter_mut().enumerate() {
        *c = coeff(i);
    }
    for k in (0..=top).rev() {
        // j holds the unnormalized J_{f+k}
        if k == n {
            at_n = j;
        }
        if k % 2 == 0 {
            norm += coeffs[k / 2] * j;
        }
        if k == 0 {
            break;
        }
        let jm1 = 2.0 * (f + k as f64) / x * j - jp1;
        jp1 = j;
        j = jm1;
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp1 *= 1e-250;
            at_n *= 1e-250;
            norm *= 1e-250;
        }
    }
    at_n * (0.5 * x).powf(f) / norm
}

/// `J'_ν(x) = (ν/x) J_ν(x) - J_{ν+1}(x)`.
fn bessel_j_prime(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return match nu {
            1.0 => 0.5,
            v if v == 0.0 || v > 1.0 => 0.0,
            _ => f64::INFINITY,
        };
    }
    nu / x * bessel_j_raw(nu, x) - bessel_j_raw(nu + 1.0, x)
}

/// First positive zero `j_{ν,1}` of `J_ν`, `ν ∈ [0, 20]`.
pub fn bessel_first_zero(nu: f64) -> Result<f64> {
    if !(0.0..=20.0).contains(&nu) {
        return Err(invalid(format!("Bessel order must lie in [0, 20], got {nu}")));
    }
    // j_{ν,1} > sqrt(ν(ν+2)); McMahon-type estimate for the upper end of the scan
    let lower = (nu * (nu + 2.0)).sqrt();
    let estimate = nu + 1.855_757_081_489_239 * nu.cbrt() + 2.404_825_557_695_773 * (-nu).exp();
    let step = 0.05;
    let mut a = lower.max(1e-3);
    let mut fa = bessel_j_raw(nu, a);
    if fa <= 0.0 {
        return Err(Error::BracketFailure(format!("J_{nu} is not positive at the lower bound {a}")));
    }
    let limit = estimate + 10.0;
    let mut b = a + step;
    let mut fb = bessel_j_raw(nu, b);
    while fb > 0.0 {
        if b > limit {
            return Err(Error::BracketFailure(format!("no sign change of J_{nu} below {limit}")));
        }
        a = b;
        fa = fb;
        b += step;
        fb = bessel_j_raw(nu, b);
    }
    // bisection to a narrow bracket, then safeguarded Newton
    for _ in 0..30 {
        let m = 0.5 * (a + b);
        let fm = bessel_j_raw(nu, m);
        if fm > 0.0 {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    let _ = fa;
    let mut x = 0.5 * (a + b);
    for _ in 0..50 {
        let fx = bessel_j_raw(nu, x);
        let dx = fx / bessel_j_prime(nu, x);
        let next = x - dx;
        let next = if next > a && next < b { next } else { 0.5 * (a + b) };
        if fx > 0.0 {
            a = x;
        } else {
            b = x;
        }
        if (next - x).abs() <= 1e-16 * x {
            x = next;
            break;
        }
        x = next;
    }
    Ok(x)
}

/// First radial eigenfunction `φ₁(r) = r^{1-N/2} J_m(j_{m,1} r)` of
/// `-Δ - Λ/|x|²` on the unit ball, `m = sqrt(Λ_N - Λ)`, eigenvalue `j_{m,1}²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialMode {
    pub n: usize,
    pub lambda: f64,
    pub m: f64,
    pub zero: f64,
    pub eigenvalue: f64,
}

impl RadialMode {
    pub fn new(n: usize, lambda: f64) -> Result<Self> {
        let cap = hardy_const(n)?;
        if !(0.0..=cap).contains(&lambda) {
            return Err(invalid(format!("amplitude must lie in [0, {cap}], got {lambda}")));
        }
        let m = (cap - lambda).max(0.0).sqrt();
        let zero = bessel_first_zero(m)?;
        Ok(RadialMode { n, lambda, m, zero, eigenvalue: zero * zero })
    }

    fn a(&self) -> f64 {
        1.0 - 0.5 * self.n as f64
    }

    /// `φ₁(r)` for `r ∈ [0, 1]`; at `r = 0` the limit (possibly infinite).
    pub fn value(&self, r: f64) -> f64 {
        let a = self.a();
        if r == 0.0 {
            let e = a + self.m;
            return if e.abs() < 1e-14 {
                (0.5 * self.zero).powf(self.m) / gamma(self.m + 1.0)
            } else if e > 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
        }
        r.powf(a) * bessel_j_raw(self.m, self.zero * r)
    }

    /// `φ₁'(r) = r^{a-1} [(a+m) J_m(zr) - z r J_{m+1}(zr)]`, `a = 1 - N/2`.
    pub fn derivative(&self, r: f64) -> f64 {
        let a = self.a();
        let z = self.zero;
        let am = a + self.m;
        let first = if am.abs() < 1e-14 { 0.0 } else { am * bessel_j_raw(self.m, z * r) };
        r.powf(a - 1.0) * (first - z * r * bessel_j_raw(self.m + 1.0, z * r))
    }
}

fn check_radius(r: f64) -> Result<()> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(invalid(format!("radius must lie in (0, 1], got {r}")));
    }
    Ok(())
}

/// `(φ₁(r), λ₁)` for the subcritical problem.
pub fn phi1_subcritical(n: usize, lambda: f64, r: f64) -> Result<(f64, f64)> {
    check_radius(r)?;
    let mode = RadialMode::new(n, lambda)?;
    Ok((mode.value(r), mode.eigenvalue))
}

/// `(φ₁(r), μ₁)` for the critical problem `Λ = Λ_N`.
pub fn phi1_critical(n: usize, r: f64) -> Result<(f64, f64)> {
    check_radius(r)?;
    let mode = RadialMode::new(n, hardy_const(n)?)?;
    Ok((mode.value(r), mode.eigenvalue))
}

/// Parameters of the truncated profile `u_ε = r^{1-N/2} (log 1/r)^α η_ε(r) ψ(r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffParams {
    pub eps: f64,
    pub mu: f64,
    pub alpha: f64,
    pub n: usize,
}

impl CutoffParams {
    /// `ε ∈ (0, 1/4)`, `μ ∈ (0, 1/2)`, `α >= 0`, `N >= 3`.
    pub fn new(eps: f64, mu: f64, alpha: f64, n: usize) -> Result<Self> {
        let p = CutoffParams { eps, mu, alpha, n };
        p.check()?;
        Ok(p)
    }

    fn check(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 0.25) {
            return Err(invalid(format!("ε must lie in (0, 1/4), got {}", self.eps)));
        }
        // the rising part of ξ sits on [μ, 1-μ], which is empty for μ >= 1/2
        if !(self.mu > 0.0 && self.mu < 0.5) {
            return Err(invalid(format!("μ must lie in (0, 1/2), got {}", self.mu)));
        }
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(invalid(format!("α must be a finite real >= 0, got {}", self.alpha)));
        }
        hardy_const(self.n)?;
        Ok(())
    }

    /// Below this radius `u_ε` vanishes.
    pub fn inner_radius(&self) -> f64 {
        self.eps.powf(2.0 - self.mu)
    }

    /// Above this radius `η_ε = 1`.
    pub fn plateau_radius(&self) -> f64 {
        self.eps.powf(1.0 + self.mu)
    }
}

/// Quintic smoothstep `6t⁵ - 15t⁴ + 10t³` and its first two derivatives, clamped to `[0, 1]`.
pub fn smoothstep(t: f64) -> (f64, f64, f64) {
    if t <= 0.0 {
        (0.0, 0.0, 0.0)
    } else if t >= 1.0 {
        (1.0, 0.0, 0.0)
    } else {
        let s = t * t * t * (t * (6.0 * t - 15.0) + 10.0);
        let ds = 30.0 * t * t * (1.0 - t) * (1.0 - t);
        let dds = 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t);
        (s, ds, dds)
    }
}

/// `η_ε` and its first two radial derivatives.
pub fn cutoff_eta_derivs(p: &CutoffParams, r: f64) -> (f64, f64, f64) {
    let l = -p.eps.ln();
    let s = (r / (p.eps * p.eps)).ln() / l;
    let width = 1.0 - 2.0 * p.mu;
    let (xi, dxi, ddxi) = smoothstep((s - p.mu) / width);
    let (dxi, ddxi) = (dxi / width, ddxi / (width * width));
    let d1 = dxi / (r * l);
    let d2 = ddxi / (r * r * l * l) - dxi / (r * r * l);
    (xi, d1, d2)
}

/// `η_ε(r) = ξ(log(r/ε²)/log(1/ε))`.
pub fn cutoff_eta(p: &CutoffParams, r: f64) -> Result<f64> {
    p.check()?;
    check_radius(r)?;
    Ok(cutoff_eta_derivs(p, r).0)
}

/// Outer cutoff `ψ`: 1 on `r <= 1/4`, 0 on `r >= 1/2`, with two derivatives.
pub fn outer_cutoff(r: f64) -> (f64, f64, f64) {
    let (s, ds, dds) = smoothstep((r - 0.25) / 0.25);
    (1.0 - s, -4.0 * ds, -16.0 * dds)
}

/// `u_ε` and its first two radial derivatives.
pub fn u_eps_derivs(p: &CutoffParams, r: f64) -> (f64, f64, f64) {
    if r <= p.inner_radius() || r >= 0.5 {
        return (0.0, 0.0, 0.0);
    }
    let pw = 1.0 - 0.5 * p.n as f64;
    let big_l = -r.ln();
    let a = p.alpha;
    let la = big_l.powf(a);
    let (la1, la2) = if a == 0.0 { (0.0, 0.0) } else { (a * big_l.powf(a - 1.0), a * (a - 1.0) * big_l.powf(a - 2.0)) };
    let rp = r.powf(pw);
    let g = rp * la;
    let dg = rp / r * (pw * la - la1);
    let ddg = rp / (r * r) * (pw * (pw - 1.0) * la - (2.0 * pw - 1.0) * la1 + la2);
    let (e, de, dde) = cutoff_eta_derivs(p, r);
    let (s, ds, dds) = outer_cutoff(r);
    let u = g * e * s;
    let du = dg * e * s + g * de * s + g * e * ds;
    let ddu = ddg * e * s + g * dde * s + g * e * dds + 2.0 * (dg * de * s + dg * e * ds + g * de * ds);
    (u, du, ddu)
}

/// `u_ε(r)`.
pub fn u_eps(p: &CutoffParams, r: f64) -> Result<f64> {
    p.check()?;
    check_radius(r)?;
    Ok(u_eps_derivs(p, r).0)
}

/// The Hardy quotient pieces of `u_ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinSeqReport {
    pub eps: f64,
    pub alpha: f64,
    /// `∫|∇u_ε|² - Λ_N ∫u_ε²/|x|²`
    pub a_eps: f64,
    /// `∫u_ε²/|x|²`
    pub b_eps: f64,
    pub ratio: f64,
    pub quadrature_tol: f64,
}

fn support_pieces(p: &CutoffParams) -> [(f64, f64); 3] {
    let (r0, r1) = (p.inner_radius(), p.plateau_radius());
    [(r0, r1), (r1, 0.25), (0.25, 0.5)]
}

fn integrate_support(p: &CutoffParams, g: impl Fn(f64) -> f64, k: f64, tol: f64) -> Result<f64> {
    let mut total = 0.0;
    for (a, b) in support_pieces(p) {
        total += radial_integrate(&g, a, b, k, tol)?;
    }
    Ok(total)
}

/// `A_ε`, `B_ε` over the whole ball (surface factor included).
pub fn minseq_report(p: &CutoffParams, tol: f64) -> Result<MinSeqReport> {
    p.check()?;
    let n = p.n as f64;
    let omega = sphere_area(p.n);
    let lam = hardy_const(p.n)?;
    let grad = integrate_support(p, |r| u_eps_derivs(p, r).1.powi(2), n - 1.0, tol)?;
    let b = integrate_support(p, |r| u_eps_derivs(p, r).0.powi(2), n - 3.0, tol)?;
    let a = omega * (grad - lam * b);
    let b = omega * b;
    Ok(MinSeqReport { eps: p.eps, alpha: p.alpha, a_eps: a, b_eps: b, ratio: a / b, quadrature_tol: tol })
}

/// `A_ε` through the ground-state form `∫ (r u' + γ u)² r^{N-3} dr`, `γ = (N-2)/2`,
/// which has no cancellation.
pub fn minseq_deficit_ground_state(p: &CutoffParams, tol: f64) -> Result<f64> {
    p.check()?;
    let n = p.n as f64;
    let gamma = 0.5 * (n - 2.0);
    let v = integrate_support(
        p,
        |r| {
            let (u, du, _) = u_eps_derivs(p, r);
            (r * du + gamma * u).powi(2)
        },
        n - 3.0,
        tol,
    )?;
    Ok(sphere_area(p.n) * v)
}

/// `ω_{N-1} ∫ u_ε''² r^{N-1} dr`, the radial second-derivative energy.
pub fn minseq_h2(p: &CutoffParams, tol: f64) -> Result<f64> {
    p.check()?;
    let n = p.n as f64;
    Ok(sphere_area(p.n) * integrate_support(p, |r| u_eps_derivs(p, r).2.powi(2), n - 1.0, tol)?)
}

/// `∫_0^h r^α / log² r dr` and its small-`h` predictor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogIntegral {
    pub value: f64,
    /// `h^{α+1}/|log h|²` for `α > -1`, `1/|log h|` for `α = -1`.
    pub predictor: f64,
}

pub fn log_integral(alpha: f64, h: f64, tol: f64) -> Result<LogIntegral> {
    if alpha < -1.0 {
        return Err(Error::Divergent(format!("∫_0 r^{alpha}/log² r dr diverges for α < -1")));
    }
    if !(h > 0.0 && h <= 0.5) {
        return Err(invalid(format!("h must lie in (0, 1/2], got {h}")));
    }
    let value = radial_integrate_log(|_, l| 1.0 / (l * l), 0.0, h, alpha, tol)?;
    let lh = h.ln().abs();
    let predictor = if alpha == -1.0 { 1.0 / lh } else { h.powf(alpha + 1.0) / (lh * lh) };
    Ok(LogIntegral { value, predictor })
}

/// `min_A ∫_T |Du - A|^p dx` over constant vectors `A`.
///
/// For `p = 2` the minimizer is the mean of `Du`; otherwise the convex
/// objective is minimized by damped Newton iteration started at the mean.
pub fn best_affine_gradient_error(
    map: &AffineCellMap,
    du: impl Fn(&[f64]) -> [f64; 3],
    p_norm: f64,
) -> Result<f64> {
    if !(p_norm > 1.0) || !p_norm.is_finite() {
        return Err(invalid(format!("p must lie in (1, ∞), got {p_norm}")));
    }
    let dim = map.dim;
    let verts = map.vertices();
    let (points, weights): (Vec<Vec<f64>>, Vec<f64>) = match dim {
        1 => gauss_legendre(12).iter().map(|&(x, w)| (vec![1.0 - x, x], w)).unzip(),
        _ => collapsed_tet(8),
    };
    let samples: Vec<([f64; 3], f64)> = points
        .iter()
        .zip(&weights)
        .map(|(lam, &w)| {
            let x: Vec<f64> = (0..dim).map(|d| lam.iter().zip(&verts).map(|(l, v)| l * v[d]).sum()).collect();
            (du(&x), w * map.det_abs)
        })
        .collect();
    let volume: f64 = samples.iter().map(|s| s.1).sum();
    let mean: [f64; 3] =
        std::array::from_fn(|d| samples.iter().map(|(g, w)| g[d] * w).sum::<f64>() / volume);
    let objective = |a: &[f64; 3]| -> f64 {
        samples
            .iter()
            .map(|(g, w)| {
                let s: f64 = (0..dim).map(|d| (g[d] - a[d]).powi(2)).sum();
                w * s.powf(0.5 * p_norm)
            })
            .sum()
    };
    let spread = samples
        .iter()
        .map(|(g, _)| (0..dim).map(|d| (g[d] - mean[d]).abs()).fold(0.0, f64::max))
        .fold(0.0, f64::max);
    let size = (0..dim).map(|d| mean[d].abs()).fold(f64::MIN_POSITIVE, f64::max);
    // a constant gradient has a degenerate minimum that Newton only approaches linearly
    if p_norm == 2.0 || spread <= 1e-13 * size {
        return Ok(objective(&mean));
    }
    // gradient and Hessian of Σ w |g - a|^p; the curvature weight |d|^{p-2}
    // is floored so that it stays finite for p < 2
    let derivs = |a: &[f64; 3]| -> ([f64; 3], [[f64; 3]; 3]) {
        let mut grad = [0.0; 3];
        let mut hess = [[0.0; 3]; 3];
        for (g, w) in &samples {
            let d: [f64; 3] = std::array::from_fn(|k| if k < dim { g[k] - a[k] } else { 0.0 });
            let s: f64 = d.iter().map(|v| v * v).sum();
            if s == 0.0 {
                continue;
            }
            let c = w * p_norm * s.powf(0.5 * p_norm - 1.0);
            let c2 = w * p_norm * (p_norm - 2.0) * s.max(1e-300).powf(0.5 * p_norm - 2.0);
            for i in 0..dim {
                grad[i] -= c * d[i];
                for j in 0..dim {
                    hess[i][j] += c2 * d[i] * d[j] + if i == j { c } else { 0.0 };
                }
            }
        }
        (grad, hess)
    };
    let mut a = mean;
    let mut fa = objective(&a);
    for _ in 0..200 {
        let (g, h) = derivs(&a);
        let Some(step) = solve_small(&h, &g, dim) else {
            return Ok(fa);
        };
        let decrement: f64 = (0..dim).map(|d| g[d] * step[d]).sum();
        if !(decrement > 1e-15 * fa) {
            return Ok(fa);
        }
        let mut t = 1.0;
        let mut moved = false;
        for _ in 0..60 {
            let trial: [f64; 3] = std::array::from_fn(|d| a[d] - t * step[d]);
            let ft = objective(&trial);
            if ft < fa && ft <= fa - 0.25 * t * decrement {
                a = trial;
                fa = ft;
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if !moved {
            // the decrement is at the rounding level of the objective
            return Ok(fa);
        }
    }
    Err(Error::NoConvergence("affine gradient minimization".into()))
}

/// `h x = g` for a symmetric positive definite `dim x dim` block, by Gaussian elimination.
fn solve_small(h: &[[f64; 3]; 3], g: &[f64; 3], dim: usize) -> Option<[f64; 3]> {
    let mut m = *h;
    let mut x = *g;
    for k in 0..dim {
        if !(m[k][k] > 0.0) {
            return None;
        }
        for i in k + 1..dim {
            let f = m[i][k] / m[k][k];
            for j in k..dim {
                m[i][j] -= f * m[k][j];
            }
            x[i] -= f * x[k];
        }
    }
    for k in (0..dim).rev() {
        for j in k + 1..dim {
            x[k] -= m[k][j] * x[j];
        }
        x[k] /= m[k][k];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn hardy_constants() {
        assert_eq!(hardy_const(3).unwrap(), 0.25);
        assert_eq!(hardy_const(4).unwrap(), 1.0);
        assert_eq!(hardy_const(10).unwrap(), 16.0);
        assert!(hardy_const(2).is_err());
    }

    #[test]
    fn gamma_values() {
        assert_relative_eq!(gamma(5.0), 24.0, max_relative = 1e-14);
        assert_relative_eq!(gamma(0.5), PI.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(sphere_area(3), 4.0 * PI, max_relative = 1e-14);
    }

    #[test]
    fn bessel_basics() {
        assert_eq!(bessel_j(0.0, 0.0).unwrap(), 1.0);
        for x in [0.5, 1.0, 2.0, 5.0, 7.5, 30.0] {
            let closed = (2.0 / (PI * x)).sqrt() * x.sin();
            assert!((bessel_j(0.5, x).unwrap() - closed).abs() < 1e-12, "x = {x}");
        }
        assert!(bessel_j(0.0, 2.404825557695773).unwrap().abs() < 1e-10);
        assert!(bessel_j(21.0, 1.0).is_err());
        assert!(bessel_j(1.0, 101.0).is_err());
    }

    #[test]
    fn first_zeros() {
        assert_relative_eq!(bessel_first_zero(0.0).unwrap(), 2.404825557695773, max_relative = 1e-13);
        assert_relative_eq!(bessel_first_zero(0.5).unwrap(), PI, max_relative = 1e-13);
        assert_relative_eq!(bessel_first_zero(1.0).unwrap(), 3.831705970207512, max_relative = 1e-13);
    }

    #[test]
    fn smoothstep_junctions() {
        assert_eq!(smoothstep(0.0), (0.0, 0.0, 0.0));
        assert_eq!(smoothstep(1.0), (1.0, 0.0, 0.0));
        let (s, ds, dds) = smoothstep(0.5);
        assert_eq!((s, ds, dds), (0.5, 1.875, 0.0));
    }

    #[test]
    fn cutoff_support() {
        let p = CutoffParams::new(0.01, 0.25, 1.0, 3).unwrap();
        assert_eq!(cutoff_eta(&p, p.inner_radius()).unwrap(), 0.0);
        assert_eq!(cutoff_eta(&p, 0.01).unwrap(), 1.0);
        assert_eq!(u_eps(&p, 0.5).unwrap(), 0.0);
        let r: f64 = 0.2;
        assert_relative_eq!(u_eps(&p, r).unwrap(), r.powf(-0.5) * (1.0 / r).ln(), max_relative = 1e-15);
        assert!(CutoffParams::new(0.01, 0.5, 1.0, 3).is_err());
        assert!(CutoffParams::new(0.3, 0.25, 1.0, 3).is_err());
    }

    #[test]
    fn deficit_agrees_with_ground_state_form() {
        let p = CutoffParams::new(2f64.powi(-6), 0.25, 1.0, 3).unwrap();
        let rep = minseq_report(&p, 1e-12).unwrap();
        let gs = minseq_deficit_ground_state(&p, 1e-12).unwrap();
        assert_relative_eq!(rep.a_eps, gs, max_relative = 1e-9);
        assert!(rep.a_eps > 0.0 && rep.b_eps > 0.0);
    }

    #[test]
    fn log_integral_alpha_minus_one_is_exact() {
        let li = log_integral(-1.0, 1e-4, 1e-12).unwrap();
        assert_relative_eq!(li.value, li.predictor, max_relative = 1e-10);
        assert!(log_integral(-1.5, 0.1, 1e-10).is_err());
    }

    #[test]
    fn affine_gradient_error_of_affine_is_zero() {
        let p = [[0.1, 0.0, 0.0], [0.6, 0.1, 0.0], [0.2, 0.5, 0.1], [0.1, 0.2, 0.7]];
        let map = AffineCellMap::from_vertices(3, &p).unwrap();
        let v = best_affine_gradient_error(&map, |_| [1.0, -2.0, 0.5], 2.0).unwrap();
        assert!(v.abs() < 1e-20);
        let v3 = best_affine_gradient_error(&map, |_| [1.0, -2.0, 0.5], 3.0).unwrap();
        assert!(v3.abs() < 1e-20);
    }
}
