//! P1 Galerkin matrices over interior degrees of freedom.
//!
//! Boundary vertices are excluded from the dof set, which imposes the
//! homogeneous Dirichlet condition exactly. On 1D meshes the forms can be
//! taken either with the plain measure `dx` or with the radial measure
//! `r^{N-1} dr` of radial functions on the N-ball (surface factor omitted).

use std::f64::consts::E;

use crate::error::{invalid, Error, Result};
use crate::mesh::{cell_map, SimplicialMesh};
use crate::par;
use crate::quadrature::{integrate_cell_bary, radial_integrate_log, SingularWeight, WeightKind};
use crate::sparse::SparseSym;

pub use crate::sparse::quadratic_form;

/// Default relative tolerance for entries computed by quadrature.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Default log normalization radius: `log(e/|x|) >= 1` on the unit ball.
pub const DEFAULT_R_LOG: f64 = E;

/// Vertex to dof numbering; boundary vertices get no dof.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    interior_index: Vec<Option<usize>>,
    vertices: Vec<usize>,
}

impl DofMap {
    pub fn new(mesh: &SimplicialMesh) -> Self {
        let mut interior_index = vec![None; mesh.n_vertices()];
        let mut vertices = Vec::new();
        for (v, slot) in interior_index.iter_mut().enumerate() {
            if !mesh.is_boundary(v) {
                *slot = Some(vertices.len());
                vertices.push(v);
            }
        }
        DofMap { interior_index, vertices }
    }

    pub fn n_dofs(&self) -> usize {
        self.vertices.len()
    }

    pub fn dof(&self, vertex: usize) -> Option<usize> {
        self.interior_index[vertex]
    }

    pub fn vertex(&self, dof: usize) -> usize {
        self.vertices[dof]
    }
}

/// Integration measure for 1D meshes. Ball meshes always use `dx`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    Lebesgue,
    /// `r^{N-1} dr` for radial functions in dimension `N`.
    Radial(usize),
}

/// The bilinear forms of the Rayleigh quotients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Form {
    /// `∫ ∇u·∇v`
    Stiffness,
    /// `∫ u v`
    Mass,
    /// `∫ u v / |x|^2`
    HardyMass,
    /// `∫ u v / (|x|^2 log^2(R/|x|))`
    LogHardyMass { r_log: f64 },
    /// `∫ ∇u·∇v / log^2(R/|x|)`
    LogStiffness { r_log: f64 },
    /// `∫ |x|^{-(N-2)} ∇u·∇v`
    MuStiffness { n: usize },
    /// `∫ |x|^{-(N-2)} u v`
    MuMass { n: usize },
}

impl Form {
    fn is_gradient(self) -> bool {
        matches!(self, Form::Stiffness | Form::LogStiffness { .. } | Form::MuStiffness { .. })
    }

    fn weight(self) -> Result<Option<SingularWeight>> {
        Ok(match self {
            Form::Stiffness | Form::Mass => None,
            Form::HardyMass => Some(SingularWeight::inv_sq()),
            Form::LogHardyMass { r_log } => Some(SingularWeight::new(WeightKind::InvSqLogSq, r_log, 3)?),
            Form::LogStiffness { r_log } => Some(SingularWeight::new(WeightKind::LogSqInv, r_log, 3)?),
            Form::MuStiffness { n } | Form::MuMass { n } => {
                if n == 2 {
                    None
                } else {
                    Some(SingularWeight::new(WeightKind::MuWeight, 1.0, n)?)
                }
            }
        })
    }
}

/// Assembles `form` over interior dofs with the given measure and entry tolerance.
pub fn assemble_form(mesh: &SimplicialMesh, form: Form, measure: Measure, tol: f64) -> Result<SparseSym> {
    let dofs = DofMap::new(mesh);
    let locals = match mesh.dim() {
        1 => local_matrices_1d(mesh, form, measure, tol)?,
        3 => {
            if measure != Measure::Lebesgue {
                return Err(Error::Unsupported("radial measure on a 3D mesh".into()));
            }
            local_matrices_3d(mesh, form, tol)?
        }
        d => return Err(Error::Unsupported(format!("assembly in dimension {d}"))),
    };
    let k = mesh.dim() + 1;
    let mut trips = Vec::with_capacity(mesh.n_cells() * k * (k + 1) / 2);
    for (c, local) in locals.iter().enumerate() {
        let cell = mesh.cell(c);
        for a in 0..k {
            for b in 0..=a {
                if let (Some(i), Some(j)) = (dofs.dof(cell[a]), dofs.dof(cell[b])) {
                    trips.push((i, j, local[a * k + b]));
                }
            }
        }
    }
    SparseSym::from_triplets(dofs.n_dofs(), &trips)
}

/// `A`, the form `∫ ∇u·∇v` (plain measure).
pub fn assemble_stiffness(mesh: &SimplicialMesh) -> Result<SparseSym> {
    assemble_form(mesh, Form::Stiffness, Measure::Lebesgue, DEFAULT_TOL)
}

/// `M`, the form `∫ u v` (plain measure).
pub fn assemble_mass(mesh: &SimplicialMesh) -> Result<SparseSym> {
    assemble_form(mesh, Form::Mass, Measure::Lebesgue, DEFAULT_TOL)
}

/// `W`, the form `∫ u v/|x|^2` on a ball mesh (N = 3). On 1D meshes use
/// [`assemble_form`] with [`Measure::Radial`].
pub fn assemble_hardy_mass(mesh: &SimplicialMesh) -> Result<SparseSym> {
    require_ball(mesh, "the Hardy mass")?;
    assemble_form(mesh, Form::HardyMass, Measure::Lebesgue, DEFAULT_TOL)
}

pub fn assemble_log_hardy_mass(mesh: &SimplicialMesh, r_log: f64) -> Result<SparseSym> {
    require_ball(mesh, "the log-Hardy mass")?;
    assemble_form(mesh, Form::LogHardyMass { r_log }, Measure::Lebesgue, DEFAULT_TOL)
}

pub fn assemble_log_stiffness(mesh: &SimplicialMesh, r_log: f64) -> Result<SparseSym> {
    assemble_form(mesh, Form::LogStiffness { r_log }, Measure::Lebesgue, DEFAULT_TOL)
}

/// The pair `(∫|x|^{-(N-2)}∇u·∇v, ∫|x|^{-(N-2)}uv)` on a ball mesh.
pub fn assemble_mu_weighted(mesh: &SimplicialMesh, n: usize) -> Result<(SparseSym, SparseSym)> {
    require_ball(mesh, "the mu-weighted forms")?;
    if !(2..=4).contains(&n) {
        return Err(Error::Unsupported(format!(
            "|x|^-(N-2) is not locally integrable against 3D cells for N = {n}"
        )));
    }
    Ok((
        assemble_form(mesh, Form::MuStiffness { n }, Measure::Lebesgue, DEFAULT_TOL)?,
        assemble_form(mesh, Form::MuMass { n }, Measure::Lebesgue, DEFAULT_TOL)?,
    ))
}

fn require_ball(mesh: &SimplicialMesh, what: &str) -> Result<()> {
    if mesh.dim() != 3 {
        return Err(Error::Unsupported(format!(
            "{what} with the plain 1D measure (|x|^-2 is not integrable at 0 for N < 3)"
        )));
    }
    Ok(())
}

/// Vertex values of `f` at interior dofs.
pub fn interpolate(mesh: &SimplicialMesh, f: impl Fn(&[f64]) -> f64) -> Result<Vec<f64>> {
    let dofs = DofMap::new(mesh);
    (0..dofs.n_dofs())
        .map(|d| {
            let v = dofs.vertex(d);
            let y = f(mesh.vertex(v));
            if y.is_finite() {
                Ok(y)
            } else {
                Err(invalid(format!("interpolated function is {y} at vertex {v}")))
            }
        })
        .collect()
}

/// Extends a dof vector by zero to all vertices.
pub fn extend_by_zero(mesh: &SimplicialMesh, x: &[f64]) -> Result<Vec<f64>> {
    let dofs = DofMap::new(mesh);
    if x.len() != dofs.n_dofs() {
        return Err(Error::DimensionMismatch { expected: dofs.n_dofs(), got: x.len() });
    }
    let mut out = vec![0.0; mesh.n_vertices()];
    for (d, &v) in x.iter().enumerate() {
        out[dofs.vertex(d)] = v;
    }
    Ok(out)
}

/// `∫_T w` for every cell of a ball mesh.
pub fn cell_weight_integrals(mesh: &SimplicialMesh, weight: &SingularWeight, tol: f64) -> Result<Vec<f64>> {
    require_ball(mesh, "per-cell weight integrals")?;
    let out: Vec<Result<f64>> = par::map_range(mesh.n_cells(), |c| {
        let p = mesh.cell_points(c);
        integrate_cell_bary(&p, Some(weight), 1, tol, |_, o| o[0] = 1.0).map(|v| v[0])
    });
    out.into_iter().collect()
}

/// `∫_{mesh} |x|^{-2} dx`.
pub fn hardy_weight_total(mesh: &SimplicialMesh, tol: f64) -> Result<f64> {
    Ok(cell_weight_integrals(mesh, &SingularWeight::inv_sq(), tol)?.iter().sum())
}

/// Gradients of the barycentric coordinates of a tetrahedron.
pub(crate) fn tet_gradients(p: &[[f64; 3]; 4]) -> [[f64; 3]; 4] {
    let e: [[f64; 3]; 3] = std::array::from_fn(|k| std::array::from_fn(|d| p[k + 1][d] - p[0][d]));
    // rows of the inverse of [e1 e2 e3] are the cross products over the determinant
    let cross = |a: &[f64; 3], b: &[f64; 3]| [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
    let c0 = cross(&e[1], &e[2]);
    let det = e[0][0] * c0[0] + e[0][1] * c0[1] + e[0][2] * c0[2];
    let g1 = c0.map(|v| v / det);
    let g2 = cross(&e[2], &e[0]).map(|v| v / det);
    let g3 = cross(&e[0], &e[1]).map(|v| v / det);
    let g0 = std::array::from_fn(|d| -(g1[d] + g2[d] + g3[d]));
    [g0, g1, g2, g3]
}

fn local_matrices_3d(mesh: &SimplicialMesh, form: Form, tol: f64) -> Result<Vec<Vec<f64>>> {
    let weight = form.weight()?;
    let results: Vec<Result<Vec<f64>>> = par::map_range(mesh.n_cells(), |c| {
        let map = cell_map(mesh, c)?;
        let p = mesh.cell_points(c);
        let vol = map.volume();
        let mut local = vec![0.0; 16];
        if form.is_gradient() {
            let g = tet_gradients(&p);
            let scale = match &weight {
                None => vol,
                Some(w) => integrate_cell_bary(&p, Some(w), 1, tol, |_, o| o[0] = 1.0)?[0],
            };
            for a in 0..4 {
                for b in 0..4 {
                    local[a * 4 + b] = scale * (g[a][0] * g[b][0] + g[a][1] * g[b][1] + g[a][2] * g[b][2]);
                }
            }
        } else {
            match &weight {
                None => {
                    for a in 0..4 {
                        for b in 0..4 {
                            local[a * 4 + b] = vol / 20.0 * if a == b { 2.0 } else { 1.0 };
                        }
                    }
                }
                Some(w) => {
                    let vals = integrate_cell_bary(&p, Some(w), 10, tol, |lam, o| {
                        let mut k = 0;
                        for a in 0..4 {
                            for b in 0..=a {
                                o[k] = lam[a] * lam[b];
                                k += 1;
                            }
                        }
                    })?;
                    let mut k = 0;
                    for a in 0..4 {
                        for b in 0..=a {
                            local[a * 4 + b] = vals[k];
                            local[b * 4 + a] = vals[k];
                            k += 1;
                        }
                    }
                }
            }
        }
        Ok(local)
    });
    results.into_iter().collect()
}

/// Weight of a 1D form as `(r-power, log factor)`; the log factor is
/// `log^{-2}(R/r)` when present.
fn radial_weight(form: Form, measure: Measure) -> Result<(f64, Option<f64>)> {
    let base = match measure {
        Measure::Lebesgue => 0.0,
        Measure::Radial(n) => {
            if n < 3 {
                return Err(Error::Unsupported(format!("radial problems need N >= 3, got {n}")));
            }
            n as f64 - 1.0
        }
    };
    Ok(match form {
        Form::Stiffness | Form::Mass => (base, None),
        Form::HardyMass => (base - 2.0, None),
        Form::LogHardyMass { r_log } => (base - 2.0, Some(check_r_log(r_log)?)),
        Form::LogStiffness { r_log } => (base, Some(check_r_log(r_log)?)),
        Form::MuStiffness { n } | Form::MuMass { n } => {
            if let Measure::Radial(m) = measure {
                if m != n {
                    return Err(invalid(format!("mu weight for N = {n} on a radial measure with N = {m}")));
                }
            }
            (base - (n as f64 - 2.0), None)
        }
    })
}

fn check_r_log(r: f64) -> Result<f64> {
    if !(r >= 1.0) || !r.is_finite() {
        return Err(invalid(format!("log radius R must be >= 1, got {r}")));
    }
    Ok(r)
}

fn local_matrices_1d(mesh: &SimplicialMesh, form: Form, measure: Measure, tol: f64) -> Result<Vec<Vec<f64>>> {
    let (k, log_r) = radial_weight(form, measure)?;
    let gradient = form.is_gradient();
    let results: Vec<Result<Vec<f64>>> = par::map_range(mesh.n_cells(), |c| {
        let cell = mesh.cell(c);
        let (a, b) = (mesh.vertex(cell[0])[0], mesh.vertex(cell[1])[0]);
        let h = b - a;
        if !(h > 0.0) {
            return Err(Error::DegenerateCell { cell: c, volume: h });
        }
        let logw = |ln_r: f64| match log_r {
            Some(r) => {
                let l = r.ln() - ln_r;
                1.0 / (l * l)
            }
            None => 1.0,
        };
        let integral = |g: &dyn Fn(f64) -> f64| radial_integrate_log(|r, ln_r| g(r) * logw(ln_r), a, b, k, tol);
        let mut local = vec![0.0; 4];
        if gradient {
            let s = integral(&|_| 1.0)? / (h * h);
            local = vec![s, -s, -s, s];
        } else {
            let pa = |r: f64| (b - r) / h;
            let pb = |r: f64| (r - a) / h;
            local[0] = integral(&|r| pa(r) * pa(r))?;
            local[1] = integral(&|r| pa(r) * pb(r))?;
            local[2] = local[1];
            local[3] = integral(&|r| pb(r) * pb(r))?;
        }
        Ok(local)
    });
    results.into_iter().collect()
}
