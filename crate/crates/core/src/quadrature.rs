//! Quadrature on simplices, including weights that are singular at the origin.
//!
//! Cells with the origin as a vertex are integrated in cone coordinates
//! `x = t y`, `y` on the facet opposite the origin, so that `dx = t^2 |det| dt ds`.
//! In those coordinates `|x|^{-2}` loses its singularity and the log factors
//! are handled by geometrically graded panels in `t`. Other cells use a fixed
//! product rule under globally adaptive red subdivision.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::mesh::{norm3, AffineCellMap};

/// A quadrature rule on the reference simplex, in barycentric coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

const MAX_GL: usize = 32;

/// Gauss-Legendre nodes and weights on `[0, 1]` (weights sum to 1).
pub fn gauss_legendre(n: usize) -> &'static [(f64, f64)] {
    static TABLE: OnceLock<Vec<Vec<(f64, f64)>>> = OnceLock::new();
    assert!((1..=MAX_GL).contains(&n), "Gauss-Legendre order {n} not tabulated");
    &TABLE.get_or_init(|| (0..=MAX_GL).map(compute_gauss_legendre).collect())[n]
}

fn compute_gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    if n == 0 {
        return Vec::new();
    }
    let mut out = vec![(0.0, 0.0); n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // map [-1, 1] -> [0, 1]
        out[i] = (0.5 * (1.0 - x), 0.5 * w);
        out[n - 1 - i] = (0.5 * (1.0 + x), 0.5 * w);
    }
    if n % 2 == 1 {
        out[n / 2].0 = 0.5;
    }
    out
}

/// A rule on the reference simplex of dimension 1 or 3, exact to the given degree.
///
/// Degree 1 and 2 in 3D use the classical 1- and 4-point rules; higher degrees
/// use a collapsed Gauss-Legendre product, so every weight is positive.
pub fn simplex_rule(dim: usize, degree: usize) -> Result<QuadRule> {
    if !(1..=5).contains(&degree) {
        return Err(Error::Unsupported(format!("quadrature degree {degree} (supported: 1..=5)")));
    }
    match dim {
        1 => {
            let gl = gauss_legendre((degree + 2) / 2);
            Ok(QuadRule {
                dim,
                points: gl.iter().map(|&(x, _)| vec![1.0 - x, x]).collect(),
                weights: gl.iter().map(|&(_, w)| w).collect(),
                degree,
            })
        }
        3 => {
            let (points, weights) = match degree {
                1 => (vec![vec![0.25; 4]], vec![1.0 / 6.0]),
                2 => {
                    let a = (5.0 - 5f64.sqrt()) / 20.0;
                    let b = 1.0 - 3.0 * a;
                    let points = (0..4)
                        .map(|k| (0..4).map(|j| if j == k { b } else { a }).collect())
                        .collect();
                    (points, vec![1.0 / 24.0; 4])
                }
                _ => collapsed_tet((degree + 4) / 2),
            };
            Ok(QuadRule { dim, points, weights, degree })
        }
        _ => Err(Error::Unsupported(format!("simplex rules in dimension {dim}"))),
    }
}

pub(crate) fn collapsed_tet(n: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let gl = gauss_legendre(n);
    let mut points = Vec::with_capacity(n * n * n);
    let mut weights = Vec::with_capacity(n * n * n);
    for &(u, wu) in gl {
        for &(v, wv) in gl {
            for &(w, ww) in gl {
                let x = u;
                let y = v * (1.0 - u);
                let z = w * (1.0 - u) * (1.0 - v);
                points.push(vec![1.0 - x - y - z, x, y, z]);
                weights.push(wu * wv * ww * (1.0 - u) * (1.0 - u) * (1.0 - v));
            }
        }
    }
    (points, weights)
}

/// Collapsed product rule on the reference triangle: barycentric points and
/// weights summing to 1/2, exact for degree `2n - 2`.
fn triangle_rule(n: usize) -> Vec<([f64; 3], f64)> {
    let gl = gauss_legendre(n);
    let mut out = Vec::with_capacity(n * n);
    for &(u, wu) in gl {
        for &(v, wv) in gl {
            let y1 = u;
            let y2 = v * (1.0 - u);
            out.push(([1.0 - y1 - y2, y1, y2], wu * wv * (1.0 - u)));
        }
    }
    out
}

/// Integral of `f` (physical coordinates) over a cell with the mapped rule.
pub fn integrate_smooth(map: &AffineCellMap, f: impl Fn(&[f64]) -> f64, degree: usize) -> Result<f64> {
    let rule = simplex_rule(map.dim, degree)?;
    let verts = map.vertices();
    let mut x = vec![0.0; map.dim];
    let mut sum = 0.0;
    for (lam, &w) in rule.points.iter().zip(&rule.weights) {
        for (d, xd) in x.iter_mut().enumerate() {
            *xd = lam.iter().zip(&verts).map(|(l, v)| l * v[d]).sum();
        }
        sum += w * f(&x);
    }
    Ok(sum * map.det_abs)
}

/// Singular weight families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightKind {
    /// `|x|^{-2}`
    InvSq,
    /// `|x|^{-2} log^{-2}(R/|x|)`
    InvSqLogSq,
    /// `log^{-2}(R/|x|)`
    LogSqInv,
    /// `|x|^{-(N-2)}`
    MuWeight,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularWeight {
    pub kind: WeightKind,
    /// Normalization radius of the log factors.
    pub r_log: f64,
    /// Ambient dimension; only the `MuWeight` exponent depends on it.
    pub n: usize,
}

impl SingularWeight {
    pub fn new(kind: WeightKind, r_log: f64, n: usize) -> Result<Self> {
        let w = SingularWeight { kind, r_log, n };
        w.check()?;
        Ok(w)
    }

    pub fn inv_sq() -> Self {
        SingularWeight { kind: WeightKind::InvSq, r_log: 1.0, n: 3 }
    }

    fn check(&self) -> Result<()> {
        if !(self.r_log >= 1.0) || !self.r_log.is_finite() {
            return Err(invalid(format!("log radius R must be >= 1, got {}", self.r_log)));
        }
        if self.kind == WeightKind::MuWeight && self.n < 2 {
            return Err(invalid(format!("mu weight needs N >= 2, got {}", self.n)));
        }
        Ok(())
    }

    /// Weight value at radius `r > 0`.
    pub fn eval(&self, r: f64) -> f64 {
        match self.kind {
            WeightKind::InvSq => 1.0 / (r * r),
            WeightKind::InvSqLogSq => {
                let l = (self.r_log / r).ln();
                1.0 / (r * r * l * l)
            }
            WeightKind::LogSqInv => {
                let l = (self.r_log / r).ln();
                1.0 / (l * l)
            }
            WeightKind::MuWeight => r.powi(-(self.n as i32 - 2)),
        }
    }

    /// `t^2 w(t rho)`: the weight times the cone Jacobian factor, evaluated
    /// without forming `t rho` where that would lose range.
    fn cone_factor(&self, t: f64, rho: f64) -> f64 {
        let log_term = || self.r_log.ln() - t.ln() - rho.ln();
        match self.kind {
            WeightKind::InvSq => 1.0 / (rho * rho),
            WeightKind::InvSqLogSq => {
                let l = log_term();
                1.0 / (rho * rho * l * l)
            }
            WeightKind::LogSqInv => {
                let l = log_term();
                t * t / (l * l)
            }
            WeightKind::MuWeight => {
                let e = self.n as i32 - 2;
                t.powi(2 - e) / rho.powi(e)
            }
        }
    }

    /// Power of `t` the cone factor behaves like at 0; must exceed -1.
    fn cone_exponent(&self) -> i32 {
        match self.kind {
            WeightKind::InvSq | WeightKind::InvSqLogSq => 0,
            WeightKind::LogSqInv => 2,
            WeightKind::MuWeight => 2 - (self.n as i32 - 2),
        }
    }
}

const ORIGIN_TOL: f64 = 1e-14;
const T_NODES: usize = 10;
const TRI_ORDER: usize = 8;
const MAX_LEAVES: usize = 20_000;
const SUBDIVISION_ORDER: usize = 6;

/// Integral of `w(|x|) f(x)` over a cell, to relative tolerance `tol`.
pub fn integrate_singular(
    map: &AffineCellMap,
    weight: &SingularWeight,
    f: impl Fn(&[f64]) -> f64,
    tol: f64,
) -> Result<f64> {
    weight.check()?;
    check_tol(tol)?;
    let verts = map.vertices();
    match map.dim {
        1 => {
            let (a, b) = (verts[0][0].min(verts[1][0]), verts[0][0].max(verts[1][0]));
            if a < -ORIGIN_TOL {
                return Err(Error::Unsupported("1D cells must lie in [0, 1]".into()));
            }
            radial_integrate(|r| weight.eval(r) * f(&[r]), a.max(0.0), b, 0.0, tol)
        }
        3 => {
            let p = [verts[0], verts[1], verts[2], verts[3]];
            let out = integrate_cell_bary(&p, Some(weight), 1, tol, |lam, out| {
                let x: Vec<f64> = (0..3).map(|d| (0..4).map(|k| lam[k] * p[k][d]).sum()).collect();
                out[0] = f(&x);
            })?;
            Ok(out[0])
        }
        d => Err(Error::Unsupported(format!("singular quadrature in dimension {d}"))),
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(invalid(format!("tolerance must lie in (0, 1), got {tol}")));
    }
    Ok(())
}

/// Vector-valued weighted integral over a tetrahedron. `f` receives the
/// barycentric coordinates with respect to `p` and writes `nout` values.
/// `None` means the unit weight.
pub(crate) fn integrate_cell_bary<F>(
    p: &[[f64; 3]; 4],
    weight: Option<&SingularWeight>,
    nout: usize,
    tol: f64,
    f: F,
) -> Result<Vec<f64>>
where
    F: Fn(&[f64; 4], &mut [f64]),
{
    match (weight, (0..4).find(|&k| norm3(&p[k]) <= ORIGIN_TOL)) {
        (Some(w), Some(origin)) => cone_integrate(p, origin, w, nout, tol, &f),
        (w, _) => subdivide_integrate(p, w, nout, tol, &f),
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn tet_volume(p: &[[f64; 3]; 4]) -> f64 {
    crate::mesh::signed_volume(3, p).abs()
}

fn red_children_bary(c: &[[f64; 4]; 4]) -> [[[f64; 4]; 4]; 8] {
    let m = |a: usize, b: usize| -> [f64; 4] { std::array::from_fn(|k| 0.5 * (c[a][k] + c[b][k])) };
    let (x0, x1, x2, x3) = (c[0], c[1], c[2], c[3]);
    let (x01, x02, x03, x12, x13, x23) = (m(0, 1), m(0, 2), m(0, 3), m(1, 2), m(1, 3), m(2, 3));
    [
        [x0, x01, x02, x03],
        [x01, x1, x12, x13],
        [x02, x12, x2, x23],
        [x03, x13, x23, x3],
        [x01, x02, x03, x13],
        [x01, x02, x12, x13],
        [x02, x03, x13, x23],
        [x02, x12, x13, x23],
    ]
}

// Collapsed product rule on a sub-tetrahedron given in barycentric corners.
fn subtet_rule<F: Fn(&[f64; 4], &mut [f64])>(
    p: &[[f64; 3]; 4],
    corners: &[[f64; 4]; 4],
    weight: Option<&SingularWeight>,
    rule: &[(Vec<f64>, f64)],
    f: &F,
    scratch: &mut [f64],
    acc: &mut [f64],
) {
    acc.iter_mut().for_each(|a| *a = 0.0);
    for (mu, w) in rule {
        let lam: [f64; 4] = std::array::from_fn(|k| (0..4).map(|j| mu[j] * corners[j][k]).sum());
        let x: [f64; 3] = std::array::from_fn(|d| (0..4).map(|k| lam[k] * p[k][d]).sum());
        let wt = match weight {
            Some(sw) => w * sw.eval(norm3(&x)),
            None => *w,
        };
        f(&lam, scratch);
        for (a, s) in acc.iter_mut().zip(scratch.iter()) {
            *a += wt * s;
        }
    }
}

struct Leaf<R> {
    err: f64,
    value: Vec<f64>,
    children: Vec<(R, Vec<f64>)>,
}

/// Globally adaptive subdivision: the region with the largest difference
/// between its own estimate and the sum over its children is split until
/// the summed differences meet the tolerance. Values are returned unscaled.
fn adaptive_regions<R: Clone>(
    root: R,
    nout: usize,
    tol: f64,
    eval: impl Fn(&R) -> Vec<f64>,
    split: impl Fn(&R) -> Vec<R>,
) -> Result<Vec<f64>> {
    let make = |region: &R, coarse: &[f64]| -> Leaf<R> {
        let children: Vec<(R, Vec<f64>)> = split(region).into_iter().map(|c| {
            let v = eval(&c);
            (c, v)
        }).collect();
        let mut value = vec![0.0; nout];
        for (_, v) in &children {
            for (a, b) in value.iter_mut().zip(v) {
                *a += b;
            }
        }
        let err = coarse.iter().zip(&value).fold(0.0f64, |m, (c, v)| m.max((c - v).abs()));
        Leaf { err, value, children }
    };
    let root_value = eval(&root);
    let mut leaves = vec![make(&root, &root_value)];
    loop {
        let mut total = vec![0.0; nout];
        let mut err = 0.0;
        let mut worst = 0;
        for (i, leaf) in leaves.iter().enumerate() {
            for (a, b) in total.iter_mut().zip(&leaf.value) {
                *a += b;
            }
            err += leaf.err;
            if leaf.err > leaves[worst].err {
                worst = i;
            }
        }
        let scale = max_abs(&total);
        if err <= tol * scale || err <= NOISE_FLOOR * scale || !err.is_nan() && err == 0.0 {
            return Ok(total);
        }
        if !err.is_finite() || leaves.len() >= MAX_LEAVES {
            return Err(Error::QuadratureNonConvergence { estimate: scale, error: err });
        }
        let leaf = leaves.swap_remove(worst);
        for (region, coarse) in &leaf.children {
            leaves.push(make(region, coarse));
        }
    }
}

fn subdivide_integrate<F: Fn(&[f64; 4], &mut [f64])>(
    p: &[[f64; 3]; 4],
    weight: Option<&SingularWeight>,
    nout: usize,
    tol: f64,
    f: &F,
) -> Result<Vec<f64>> {
    static RULE: OnceLock<Vec<(Vec<f64>, f64)>> = OnceLock::new();
    let rule = RULE.get_or_init(|| {
        let (pts, wts) = collapsed_tet(SUBDIVISION_ORDER);
        pts.into_iter().zip(wts).collect()
    });
    let det = 6.0 * tet_volume(p);
    let identity: [[f64; 4]; 4] = std::array::from_fn(|i| std::array::from_fn(|j| if i == j { 1.0 } else { 0.0 }));
    let eval = |(corners, frac): &([[f64; 4]; 4], f64)| -> Vec<f64> {
        let mut scratch = vec![0.0; nout];
        let mut acc = vec![0.0; nout];
        subtet_rule(p, corners, weight, rule, f, &mut scratch, &mut acc);
        acc.iter_mut().for_each(|a| *a *= frac);
        acc
    };
    let split = |(corners, frac): &([[f64; 4]; 4], f64)| -> Vec<([[f64; 4]; 4], f64)> {
        red_children_bary(corners).into_iter().map(|c| (c, frac / 8.0)).collect()
    };
    let total = adaptive_regions((identity, 1.0), nout, tol, eval, split)?;
    Ok(total.into_iter().map(|v| v * det).collect())
}

fn cone_integrate<F: Fn(&[f64; 4], &mut [f64])>(
    p: &[[f64; 3]; 4],
    origin: usize,
    weight: &SingularWeight,
    nout: usize,
    tol: f64,
    f: &F,
) -> Result<Vec<f64>> {
    if weight.cone_exponent() <= -1 {
        return Err(Error::Divergent(format!(
            "weight {:?} with N = {} is not integrable at a vertex in 3D",
            weight.kind, weight.n
        )));
    }
    static TRI: OnceLock<Vec<([f64; 3], f64)>> = OnceLock::new();
    let tri = TRI.get_or_init(|| triangle_rule(TRI_ORDER));
    let det = 6.0 * tet_volume(p);
    let others: Vec<usize> = (0..4).filter(|&k| k != origin).collect();
    let panels = t_panels(tol);

    // Facet triangle in facet-barycentric corners.
    let eval_tri = |corners: &[[f64; 3]; 3], panels: &[(f64, f64)], acc: &mut [f64]| {
        let mut scratch = vec![0.0; nout];
        acc.iter_mut().for_each(|a| *a = 0.0);
        for (xi_ref, wxi) in tri.iter() {
            let xi: [f64; 3] = std::array::from_fn(|k| (0..3).map(|j| xi_ref[j] * corners[j][k]).sum());
            let y: [f64; 3] = std::array::from_fn(|d| (0..3).map(|k| xi[k] * p[others[k]][d]).sum());
            let rho = norm3(&y);
            for &(a, b) in panels {
                for &(s, ws) in gauss_legendre(T_NODES) {
                    let t = a + (b - a) * s;
                    let wt = wxi * ws * (b - a) * weight.cone_factor(t, rho);
                    let mut lam = [0.0; 4];
                    lam[origin] = 1.0 - t;
                    for k in 0..3 {
                        lam[others[k]] = t * xi[k];
                    }
                    f(&lam, &mut scratch);
                    for (acc_i, s_i) in acc.iter_mut().zip(&scratch) {
                        *acc_i += wt * s_i;
                    }
                }
            }
        }
    };

    let root: [[f64; 3]; 3] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let mut whole = vec![0.0; nout];
    let mut inner = vec![0.0; nout];
    // Power weights leave a polynomial cone factor in t, so one panel
    // normally suffices; keep it only if bisecting the panel agrees.
    let mut graded = true;
    let mut panels = panels;
    if matches!(weight.kind, WeightKind::InvSq | WeightKind::MuWeight) {
        let single = [(0.0, 1.0)];
        eval_tri(&root, &single, &mut whole);
        eval_tri(&root, &[(0.0, 0.5), (0.5, 1.0)], &mut inner);
        let diff = whole.iter().zip(&inner).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if diff <= 0.1 * tol * max_abs(&whole) || diff <= NOISE_FLOOR * max_abs(&whole) {
            panels = single.to_vec();
            graded = false;
        }
    }
    // The innermost panel must be negligible; otherwise grade deeper.
    if graded {
        loop {
            eval_tri(&root, &panels, &mut whole);
            eval_tri(&root, &panels[..1], &mut inner);
            if max_abs(&inner) <= 0.1 * tol * max_abs(&whole) || panels.len() > 1000 {
                break;
            }
            let extra = panels.len();
            panels = t_panel_list(2 * extra);
        }
    }

    if max_abs(&whole) == 0.0 {
        return Ok(vec![0.0; nout]);
    }
    let eval = |(c, frac): &([[f64; 3]; 3], f64)| -> Vec<f64> {
        let mut acc = vec![0.0; nout];
        eval_tri(c, &panels, &mut acc);
        acc.iter_mut().for_each(|a| *a *= frac);
        acc
    };
    let split = |(c, frac): &([[f64; 3]; 3], f64)| -> Vec<([[f64; 3]; 3], f64)> {
        let m = |a: usize, b: usize| -> [f64; 3] { std::array::from_fn(|k| 0.5 * (c[a][k] + c[b][k])) };
        let (m01, m02, m12) = (m(0, 1), m(0, 2), m(1, 2));
        [[c[0], m01, m02], [m01, c[1], m12], [m02, m12, c[2]], [m12, m02, m01]]
            .into_iter()
            .map(|t| (t, frac / 4.0))
            .collect()
    };
    // Facet rule weights sum to 1/2 on the reference triangle; the cone
    // Jacobian of the reference tetrahedron is t^2 with unit facet scaling.
    let total = adaptive_regions((root, 1.0), nout, tol, eval, split)?;
    Ok(total.into_iter().map(|v| v * det).collect())
}

/// Geometric panels `[0, 2^-K], [2^-K, 2^-(K-1)], ..., [1/2, 1]`.
fn t_panels(tol: f64) -> Vec<(f64, f64)> {
    let depth = (1.0 / tol).log2().ceil().max(1.0) as usize;
    t_panel_list(depth)
}

fn t_panel_list(depth: usize) -> Vec<(f64, f64)> {
    let depth = depth.min(1000);
    let mut out = Vec::with_capacity(depth + 1);
    out.push((0.0, 0.5f64.powi(depth as i32)));
    for k in (1..=depth).rev() {
        out.push((0.5f64.powi(k as i32), 0.5f64.powi(k as i32 - 1)));
    }
    out
}

// Relative accuracy below which a subregion estimate is rounding noise; the
// volume-split budget falls under it after a few refinement levels.
const NOISE_FLOOR: f64 = 1e-13;

const RADIAL_GL: usize = 12;
const RADIAL_MAX_PANELS: usize = 4000;
const RADIAL_ABS_FLOOR: f64 = 1e-30;

/// `∫_a^b g(r) r^k dr` to relative tolerance `tol`, for `0 <= a < b <= 1`.
///
/// When `a = 0` the integral is taken in the variable `s = log(b/r)`,
/// compactified to `u = s/(1+s)`, which grades geometrically toward `r = 0`.
/// Non-integrable endpoint behavior shows up as panels that never settle and
/// is reported as [`Error::Divergent`].
///
/// Past the smallest positive double `r` reads as 0; integrands whose mass
/// sits at `log r ~ -700` and below (like `1/(r log^2 r)`) should go through
/// [`radial_integrate_log`].
pub fn radial_integrate(g: impl Fn(f64) -> f64, a: f64, b: f64, k: f64, tol: f64) -> Result<f64> {
    radial_integrate_log(|r, _| g(r), a, b, k, tol)
}

/// As [`radial_integrate`], with `g` also receiving `ln r` (exact even where `r` underflows).
pub fn radial_integrate_log(g: impl Fn(f64, f64) -> f64, a: f64, b: f64, k: f64, tol: f64) -> Result<f64> {
    if !(a >= 0.0 && a < b && b <= 1.0) {
        return Err(invalid(format!("radial interval must satisfy 0 <= a < b <= 1, got [{a}, {b}]")));
    }
    if !k.is_finite() {
        return Err(invalid(format!("weight exponent must be finite, got {k}")));
    }
    check_tol(tol)?;
    if a > 0.0 {
        let h = |r: f64| g(r, r.ln()) * r.powf(k);
        return adaptive_gl(&h, a, b, tol);
    }
    let ln_b = b.ln();
    let h = |u: f64| {
        let s = u / (1.0 - u);
        let ln_r = ln_b - s;
        let r = ln_r.exp();
        // r^{k+1} dr/ds / r = r^{k+1}, times ds/du
        let factor = ((k + 1.0) * ln_r).exp();
        if factor == 0.0 {
            return 0.0;
        }
        factor * g(r, ln_r) / ((1.0 - u) * (1.0 - u))
    };
    adaptive_gl(&h, 0.0, 1.0, tol).map_err(|e| divergence(e, a, b))
}

fn divergence(e: Error, a: f64, b: f64) -> Error {
    match e {
        Error::QuadratureNonConvergence { estimate, error } if a == 0.0 => Error::Divergent(format!(
            "radial integral on [{a}, {b}] did not settle (estimate {estimate:e}, error {error:e}); \
             the integrand is likely not integrable at r = 0"
        )),
        other => other,
    }
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

fn gl_on(h: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    gauss_legendre(RADIAL_GL)
        .iter()
        .map(|&(x, w)| w * h(a + (b - a) * x))
        .sum::<f64>()
        * (b - a)
}

fn panel(h: &impl Fn(f64) -> f64, a: f64, b: f64) -> Panel {
    let whole = gl_on(h, a, b);
    let m = 0.5 * (a + b);
    let halves = gl_on(h, a, m) + gl_on(h, m, b);
    let err = if whole.is_finite() && halves.is_finite() { (whole - halves).abs() } else { f64::INFINITY };
    Panel { a, b, value: halves, err }
}

/// Globally adaptive bisection driven by the largest panel error.
pub(crate) fn adaptive_gl(h: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    let mut panels = vec![panel(h, a, b)];
    loop {
        let value: f64 = panels.iter().map(|p| p.value).sum();
        let err: f64 = panels.iter().map(|p| p.err).sum();
        // the absolute floor only matters for integrands at rounding level
        if err.is_finite() && (err <= tol * value.abs() || err <= RADIAL_ABS_FLOOR) {
            return Ok(value);
        }
        if panels.len() >= RADIAL_MAX_PANELS || !err.is_finite() && panels.len() > 200 {
            return Err(Error::QuadratureNonConvergence { estimate: value, error: err });
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .fold((0, -1.0), |best, (i, p)| if p.err > best.1 { (i, p.err) } else { best });
        let worst = panels.swap_remove(idx);
        let m = 0.5 * (worst.a + worst.b);
        if !(m > worst.a && m < worst.b) {
            return Err(Error::QuadratureNonConvergence { estimate: value, error: err });
        }
        panels.push(panel(h, worst.a, m));
        panels.push(panel(h, m, worst.b));
    }
}
