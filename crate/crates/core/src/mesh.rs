//! Conforming simplicial meshes of the radial segment `[0, 1]` and of the unit
//! ball in `R^3`, with the origin as a mesh vertex.
//!
//! Ball meshes start from the octahedron `|x1| + |x2| + |x3| <= 1` split into
//! eight tetrahedra around the origin and are refined by red refinement
//! (every tetrahedron into eight children, Bey's vertex ordering). Vertices of
//! a coarse mesh keep their indices in the refined mesh, and every new vertex
//! is the midpoint of a coarse edge, so P1 functions prolongate exactly on the
//! polyhedral family.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Which domain a mesh discretizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainTag {
    /// The radial segment `[0, 1]`.
    Interval,
    /// Polyhedral approximation `B_h ⊂ B` with boundary vertices on the unit sphere.
    BallProjected,
    /// The fixed octahedron; successive refinements are nested.
    BallPolyhedral,
}

impl DomainTag {
    pub fn as_str(self) -> &'static str {
        match self {
            DomainTag::Interval => "interval",
            DomainTag::BallProjected => "ball_projected",
            DomainTag::BallPolyhedral => "ball_polyhedral",
        }
    }
}

impl fmt::Display for DomainTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DomainTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "interval" => Ok(DomainTag::Interval),
            "ball_projected" => Ok(DomainTag::BallProjected),
            "ball_polyhedral" => Ok(DomainTag::BallPolyhedral),
            other => Err(invalid(format!("unknown domain tag `{other}`"))),
        }
    }
}

/// Boundary treatment of ball meshes under refinement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BallBoundary {
    Projected,
    Polyhedral,
}

impl FromStr for BallBoundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "projected" => Ok(BallBoundary::Projected),
            "polyhedral" => Ok(BallBoundary::Polyhedral),
            other => Err(invalid(format!("unknown boundary kind `{other}`"))),
        }
    }
}

/// A conforming simplicial mesh in dimension 1 or 3.
///
/// Coordinates and cells are stored flat. Every cell has positive volume in
/// its stored vertex order.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplicialMesh {
    dim: usize,
    coords: Vec<f64>,
    cells: Vec<usize>,
    boundary: Vec<bool>,
    level: usize,
    domain: DomainTag,
    // Refinement order of a cell is its stored order with the last two
    // vertices exchanged when this flag is set (keeps Bey's ordering while
    // storing positively oriented cells).
    swapped: Vec<bool>,
}

const ORIGIN_TOL: f64 = 1e-14;

impl SimplicialMesh {
    /// Builds a mesh from raw parts and checks every invariant.
    pub fn from_parts(
        dim: usize,
        coords: Vec<f64>,
        cells: Vec<usize>,
        boundary: Vec<bool>,
        level: usize,
        domain: DomainTag,
    ) -> Result<Self> {
        if dim != 1 && dim != 3 {
            return Err(invalid(format!("mesh dimension must be 1 or 3, got {dim}")));
        }
        let n_cells = cells.len() / (dim + 1);
        let mesh = SimplicialMesh {
            dim,
            coords,
            cells,
            boundary,
            level,
            domain,
            swapped: vec![false; n_cells],
        };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_vertices(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len() / (self.dim + 1)
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn domain(&self) -> DomainTag {
        self.domain
    }

    pub fn vertex(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    /// Vertex coordinates padded with zeros to three components.
    pub fn point(&self, i: usize) -> [f64; 3] {
        let mut p = [0.0; 3];
        p[..self.dim].copy_from_slice(self.vertex(i));
        p
    }

    pub fn cell(&self, c: usize) -> &[usize] {
        let k = self.dim + 1;
        &self.cells[c * k..(c + 1) * k]
    }

    pub fn cells(&self) -> impl Iterator<Item = &[usize]> {
        self.cells.chunks_exact(self.dim + 1)
    }

    pub fn is_boundary(&self, i: usize) -> bool {
        self.boundary[i]
    }

    pub fn boundary_flags(&self) -> &[bool] {
        &self.boundary
    }

    /// Index of the vertex located at the origin.
    pub fn origin_vertex(&self) -> Option<usize> {
        (0..self.n_vertices()).find(|&i| self.vertex(i).iter().all(|x| x.abs() <= ORIGIN_TOL))
    }

    /// Cell vertices padded to three components; only the first `dim + 1` are meaningful.
    pub fn cell_points(&self, c: usize) -> [[f64; 3]; 4] {
        let mut out = [[0.0; 3]; 4];
        for (k, &v) in self.cell(c).iter().enumerate() {
            out[k] = self.point(v);
        }
        out
    }

    /// Signed volume of a cell in its stored vertex order.
    pub fn cell_volume(&self, c: usize) -> f64 {
        let p = self.cell_points(c);
        signed_volume(self.dim, &p)
    }

    /// Checks positivity, conformity, boundary flags, the origin vertex and containment.
    pub fn validate(&self) -> Result<()> {
        let dim = self.dim;
        if !self.coords.len().is_multiple_of(dim) || !self.cells.len().is_multiple_of(dim + 1) {
            return Err(Error::InvalidMesh("ragged coordinate or cell arrays".into()));
        }
        let nv = self.n_vertices();
        if self.boundary.len() != nv {
            return Err(Error::InvalidMesh(format!(
                "{} boundary flags for {nv} vertices",
                self.boundary.len()
            )));
        }
        if let Some(&bad) = self.cells.iter().find(|&&v| v >= nv) {
            return Err(Error::InvalidMesh(format!("cell references vertex {bad} of {nv}")));
        }
        for c in 0..self.n_cells() {
            let vol = self.cell_volume(c);
            if !(vol > 0.0) {
                return Err(Error::DegenerateCell { cell: c, volume: vol });
            }
        }
        let origin = self
            .origin_vertex()
            .ok_or_else(|| Error::InvalidMesh("the origin is not a mesh vertex".into()))?;
        if self.boundary[origin] {
            return Err(Error::InvalidMesh("the origin vertex is boundary-flagged".into()));
        }
        for i in 0..nv {
            let v = self.vertex(i);
            let inside = match dim {
                1 => v[0] >= -ORIGIN_TOL && v[0] <= 1.0 + 1e-12,
                _ => norm3(&self.point(i)) <= 1.0 + 1e-12,
            };
            if !inside {
                return Err(Error::InvalidMesh(format!("vertex {i} lies outside the domain")));
            }
        }
        let expected = self.topological_boundary()?;
        for i in 0..nv {
            let want = expected[i] && i != origin;
            if want != self.boundary[i] {
                return Err(Error::InvalidMesh(format!(
                    "boundary flag of vertex {i} is {} but the vertex is {}on the boundary",
                    self.boundary[i],
                    if want { "" } else { "not " }
                )));
            }
        }
        Ok(())
    }

    /// Vertices on the topological boundary, found by facet counting. Fails
    /// when a facet is shared by more than two cells.
    fn topological_boundary(&self) -> Result<Vec<bool>> {
        let nv = self.n_vertices();
        let mut flags = vec![false; nv];
        match self.dim {
            1 => {
                let mut count = vec![0u32; nv];
                for cell in self.cells() {
                    count[cell[0]] += 1;
                    count[cell[1]] += 1;
                }
                for i in 0..nv {
                    if count[i] > 2 {
                        return Err(Error::InvalidMesh(format!("vertex {i} shared by {} cells", count[i])));
                    }
                    flags[i] = count[i] == 1;
                }
            }
            _ => {
                for (face, count) in face_counts(self) {
                    if count > 2 {
                        return Err(Error::InvalidMesh(format!("face {face:?} shared by {count} cells")));
                    }
                    if count == 1 {
                        for v in face {
                            flags[v] = true;
                        }
                    }
                }
            }
        }
        Ok(flags)
    }

    fn refinement_order(&self, c: usize) -> [usize; 4] {
        let cell = self.cell(c);
        let mut order = [cell[0], cell[1], cell[2], cell[3]];
        if self.swapped[c] {
            order.swap(2, 3);
        }
        order
    }
}

fn face_counts(mesh: &SimplicialMesh) -> Vec<([usize; 3], u32)> {
    let mut counts: HashMap<[usize; 3], u32> = HashMap::new();
    let mut order: Vec<[usize; 3]> = Vec::new();
    for cell in mesh.cells() {
        for skip in 0..4 {
            let mut face = [0usize; 3];
            let mut k = 0;
            for (j, &v) in cell.iter().enumerate() {
                if j != skip {
                    face[k] = v;
                    k += 1;
                }
            }
            face.sort_unstable();
            let entry = counts.entry(face).or_insert(0);
            if *entry == 0 {
                order.push(face);
            }
            *entry += 1;
        }
    }
    order.into_iter().map(|f| (f, counts[&f])).collect()
}

pub(crate) fn norm3(p: &[f64; 3]) -> f64 {
    (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt()
}

fn sub3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn det3(a: &[f64; 3], b: &[f64; 3], c: &[f64; 3]) -> f64 {
    let x = cross3(b, c);
    a[0] * x[0] + a[1] * x[1] + a[2] * x[2]
}

pub(crate) fn signed_volume(dim: usize, p: &[[f64; 3]; 4]) -> f64 {
    match dim {
        1 => p[1][0] - p[0][0],
        _ => det3(&sub3(&p[1], &p[0]), &sub3(&p[2], &p[0]), &sub3(&p[3], &p[0])) / 6.0,
    }
}

fn triangle_area(a: &[f64; 3], b: &[f64; 3], c: &[f64; 3]) -> f64 {
    0.5 * norm3(&cross3(&sub3(b, a), &sub3(c, a)))
}

/// Vertices `r_i = (i/n)^grading`, boundary flag only at `r = 1`.
pub fn build_interval_mesh(n_cells: usize, grading: f64) -> Result<SimplicialMesh> {
    if n_cells < 2 {
        return Err(invalid(format!("an interval mesh needs at least 2 cells, got {n_cells}")));
    }
    if !(grading >= 1.0) || !grading.is_finite() {
        return Err(invalid(format!("grading must be a finite real >= 1, got {grading}")));
    }
    let n = n_cells as f64;
    let coords: Vec<f64> = (0..=n_cells)
        .map(|i| if i == n_cells { 1.0 } else { (i as f64 / n).powf(grading) })
        .collect();
    let cells: Vec<usize> = (0..n_cells).flat_map(|i| [i, i + 1]).collect();
    let mut boundary = vec![false; n_cells + 1];
    boundary[n_cells] = true;
    Ok(SimplicialMesh {
        dim: 1,
        coords,
        cells,
        boundary,
        level: 0,
        domain: DomainTag::Interval,
        swapped: vec![false; n_cells],
    })
}

/// Octahedral ball mesh after `level` uniform refinements.
pub fn build_ball_mesh(level: usize, boundary: BallBoundary) -> SimplicialMesh {
    let mut mesh = octahedron(boundary);
    for _ in 0..level {
        mesh = refine_uniform(&mesh);
    }
    mesh
}

fn octahedron(boundary: BallBoundary) -> SimplicialMesh {
    // The octahedron with vertices ±e_i is inscribed in the unit ball.
    let coords = vec![
        0.0, 0.0, 0.0, //
        1.0, 0.0, 0.0, //
        -1.0, 0.0, 0.0, //
        0.0, 1.0, 0.0, //
        0.0, -1.0, 0.0, //
        0.0, 0.0, 1.0, //
        0.0, 0.0, -1.0,
    ];
    let mut cells = Vec::with_capacity(32);
    let mut swapped = Vec::with_capacity(8);
    for sx in [1.0, -1.0] {
        for sy in [1.0, -1.0] {
            for sz in [1.0, -1.0] {
                let x = if sx > 0.0 { 1 } else { 2 };
                let y = if sy > 0.0 { 3 } else { 4 };
                let z = if sz > 0.0 { 5 } else { 6 };
                if sx * sy * sz > 0.0 {
                    cells.extend_from_slice(&[0, x, y, z]);
                    swapped.push(false);
                } else {
                    cells.extend_from_slice(&[0, x, z, y]);
                    swapped.push(true);
                }
            }
        }
    }
    let mut flags = vec![true; 7];
    flags[0] = false;
    SimplicialMesh {
        dim: 3,
        coords,
        cells,
        boundary: flags,
        level: 0,
        domain: match boundary {
            BallBoundary::Projected => DomainTag::BallProjected,
            BallBoundary::Polyhedral => DomainTag::BallPolyhedral,
        },
        swapped,
    }
}

/// Red refinement. See [`refine_with_parents`].
pub fn refine_uniform(mesh: &SimplicialMesh) -> SimplicialMesh {
    refine_with_parents(mesh).0
}

/// Red refinement, also returning for every new vertex (index `n_vertices()` of
/// the input and above) the coarse edge it bisects.
pub fn refine_with_parents(mesh: &SimplicialMesh) -> (SimplicialMesh, Vec<[usize; 2]>) {
    match mesh.dim {
        1 => refine_interval(mesh),
        _ => refine_tetrahedral(mesh),
    }
}

fn refine_interval(mesh: &SimplicialMesh) -> (SimplicialMesh, Vec<[usize; 2]>) {
    let nv = mesh.n_vertices();
    let mut coords = mesh.coords.clone();
    let mut cells = Vec::with_capacity(mesh.cells.len() * 2);
    let mut parents = Vec::with_capacity(mesh.n_cells());
    for cell in mesh.cells() {
        let (a, b) = (cell[0], cell[1]);
        let m = nv + parents.len();
        coords.push(0.5 * (mesh.coords[a] + mesh.coords[b]));
        parents.push([a, b]);
        cells.extend_from_slice(&[a, m, m, b]);
    }
    let mut boundary = mesh.boundary.clone();
    boundary.resize(coords.len(), false);
    let n_cells = cells.len() / 2;
    let refined = SimplicialMesh {
        dim: 1,
        coords,
        cells,
        boundary,
        level: mesh.level + 1,
        domain: mesh.domain,
        swapped: vec![false; n_cells],
    };
    (refined, parents)
}

fn refine_tetrahedral(mesh: &SimplicialMesh) -> (SimplicialMesh, Vec<[usize; 2]>) {
    let nv = mesh.n_vertices();
    let mut coords = mesh.coords.clone();
    let mut parents: Vec<[usize; 2]> = Vec::new();
    let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
    let mut cells = Vec::with_capacity(mesh.cells.len() * 8);
    let mut swapped = Vec::with_capacity(mesh.n_cells() * 8);

    let mut mid = |a: usize, b: usize, coords: &mut Vec<f64>, parents: &mut Vec<[usize; 2]>| -> usize {
        let key = (a.min(b), a.max(b));
        *midpoint.entry(key).or_insert_with(|| {
            let idx = nv + parents.len();
            for k in 0..3 {
                coords.push(0.5 * (coords[3 * a + k] + coords[3 * b + k]));
            }
            parents.push([key.0, key.1]);
            idx
        })
    };

    for c in 0..mesh.n_cells() {
        let [x0, x1, x2, x3] = mesh.refinement_order(c);
        let x01 = mid(x0, x1, &mut coords, &mut parents);
        let x02 = mid(x0, x2, &mut coords, &mut parents);
        let x03 = mid(x0, x3, &mut coords, &mut parents);
        let x12 = mid(x1, x2, &mut coords, &mut parents);
        let x13 = mid(x1, x3, &mut coords, &mut parents);
        let x23 = mid(x2, x3, &mut coords, &mut parents);
        let children = [
            [x0, x01, x02, x03],
            [x01, x1, x12, x13],
            [x02, x12, x2, x23],
            [x03, x13, x23, x3],
            [x01, x02, x03, x13],
            [x01, x02, x12, x13],
            [x02, x03, x13, x23],
            [x02, x12, x13, x23],
        ];
        for child in children {
            let p = child.map(|v| [coords[3 * v], coords[3 * v + 1], coords[3 * v + 2]]);
            if signed_volume(3, &p) > 0.0 {
                cells.extend_from_slice(&child);
                swapped.push(false);
            } else {
                cells.extend_from_slice(&[child[0], child[1], child[3], child[2]]);
                swapped.push(true);
            }
        }
    }

    let n_new = coords.len() / 3;
    let mut refined = SimplicialMesh {
        dim: 3,
        coords,
        cells,
        boundary: vec![false; n_new],
        level: mesh.level + 1,
        domain: mesh.domain,
        swapped,
    };
    let topo = refined
        .topological_boundary()
        .expect("red refinement of a conforming mesh is conforming");
    refined.boundary = topo;
    if mesh.domain == DomainTag::BallProjected {
        for v in nv..n_new {
            if refined.boundary[v] {
                let p = refined.point(v);
                let r = norm3(&p);
                for k in 0..3 {
                    refined.coords[3 * v + k] = p[k] / r;
                }
            }
        }
    }
    (refined, parents)
}

/// Values of the prolongated P1 function at every vertex of the refined mesh.
pub fn prolongate(coarse_values: &[f64], parents: &[[usize; 2]]) -> Vec<f64> {
    let mut out = coarse_values.to_vec();
    out.extend(parents.iter().map(|&[a, b]| 0.5 * (coarse_values[a] + coarse_values[b])));
    out
}

/// Shape statistics of a mesh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshQuality {
    /// Largest cell diameter.
    pub h: f64,
    /// Smallest cell diameter.
    pub h_min: f64,
    /// `(h_T, rho_T)` per cell: diameter and insphere radius.
    pub per_cell: Vec<(f64, f64)>,
    /// `max h_T / rho_T`.
    pub sigma: f64,
    /// `h_min / h`.
    pub quasi_uniform_ratio: f64,
}

/// Exact diameters and insphere radii (`3|T|/area(∂T)` in 3D, half length in 1D).
pub fn quality(mesh: &SimplicialMesh) -> Result<MeshQuality> {
    let mut per_cell = Vec::with_capacity(mesh.n_cells());
    for c in 0..mesh.n_cells() {
        let p = mesh.cell_points(c);
        let vol = signed_volume(mesh.dim, &p);
        if !(vol > 0.0) {
            return Err(Error::DegenerateCell { cell: c, volume: vol });
        }
        per_cell.push(cell_shape(mesh.dim, &p, vol));
    }
    let h = per_cell.iter().map(|c| c.0).fold(0.0, f64::max);
    let h_min = per_cell.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
    let sigma = per_cell.iter().map(|c| c.0 / c.1).fold(0.0, f64::max);
    Ok(MeshQuality { h, h_min, per_cell, sigma, quasi_uniform_ratio: h_min / h })
}

pub(crate) fn cell_shape(dim: usize, p: &[[f64; 3]; 4], vol: f64) -> (f64, f64) {
    let k = dim + 1;
    let mut diam: f64 = 0.0;
    for i in 0..k {
        for j in i + 1..k {
            diam = diam.max(norm3(&sub3(&p[i], &p[j])));
        }
    }
    let rho = match dim {
        1 => 0.5 * vol,
        _ => {
            let area = triangle_area(&p[1], &p[2], &p[3])
                + triangle_area(&p[0], &p[2], &p[3])
                + triangle_area(&p[0], &p[1], &p[3])
                + triangle_area(&p[0], &p[1], &p[2]);
            3.0 * vol / area
        }
    };
    (diam, rho)
}

/// Max cell diameter.
pub fn mesh_size(mesh: &SimplicialMesh) -> f64 {
    (0..mesh.n_cells())
        .map(|c| {
            let p = mesh.cell_points(c);
            cell_shape(mesh.dim, &p, signed_volume(mesh.dim, &p).abs()).0
        })
        .fold(0.0, f64::max)
}

/// The affine map `x = B x̂ + b` from the reference simplex onto a cell.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineCellMap {
    pub dim: usize,
    /// `dim x dim`, row-major; column `k` is `v_{k+1} - v_0`.
    pub matrix: Vec<f64>,
    pub offset: Vec<f64>,
    /// `|det B| = |T| / |T̂|`.
    pub det_abs: f64,
}

impl AffineCellMap {
    /// Builds the map of the simplex with the given vertices.
    pub fn from_vertices(dim: usize, vertices: &[[f64; 3]]) -> Result<Self> {
        if dim != 1 && dim != 3 {
            return Err(invalid(format!("dimension must be 1 or 3, got {dim}")));
        }
        if vertices.len() != dim + 1 {
            return Err(Error::DimensionMismatch { expected: dim + 1, got: vertices.len() });
        }
        let mut matrix = vec![0.0; dim * dim];
        for k in 0..dim {
            for r in 0..dim {
                matrix[r * dim + k] = vertices[k + 1][r] - vertices[0][r];
            }
        }
        let det = match dim {
            1 => matrix[0],
            _ => {
                let col = |k: usize| [matrix[k], matrix[3 + k], matrix[6 + k]];
                det3(&col(0), &col(1), &col(2))
            }
        };
        let scale = vertices
            .iter()
            .skip(1)
            .map(|v| norm3(&sub3(v, &vertices[0])))
            .fold(0.0, f64::max);
        if det.abs() <= 1e-14 * scale.powi(dim as i32) || !det.is_finite() {
            return Err(Error::DegenerateCell { cell: usize::MAX, volume: det });
        }
        Ok(AffineCellMap { dim, matrix, offset: vertices[0][..dim].to_vec(), det_abs: det.abs() })
    }

    /// Physical image of a reference point.
    pub fn apply(&self, xhat: &[f64]) -> Vec<f64> {
        let d = self.dim;
        (0..d)
            .map(|r| self.offset[r] + (0..d).map(|k| self.matrix[r * d + k] * xhat[k]).sum::<f64>())
            .collect()
    }

    /// Vertex `k` of the cell, padded to three components.
    pub fn vertex(&self, k: usize) -> [f64; 3] {
        let mut p = [0.0; 3];
        for r in 0..self.dim {
            p[r] = self.offset[r] + if k == 0 { 0.0 } else { self.matrix[r * self.dim + (k - 1)] };
        }
        p
    }

    pub fn vertices(&self) -> Vec<[f64; 3]> {
        (0..=self.dim).map(|k| self.vertex(k)).collect()
    }

    /// `|T|`.
    pub fn volume(&self) -> f64 {
        self.det_abs * reference_volume(self.dim)
    }
}

/// Volume of the reference simplex: `1/dim!`.
pub fn reference_volume(dim: usize) -> f64 {
    match dim {
        1 => 1.0,
        2 => 0.5,
        _ => 1.0 / 6.0,
    }
}

/// Affine map of cell `c`.
pub fn cell_map(mesh: &SimplicialMesh, c: usize) -> Result<AffineCellMap> {
    if c >= mesh.n_cells() {
        return Err(invalid(format!("cell index {c} out of range ({} cells)", mesh.n_cells())));
    }
    let p = mesh.cell_points(c);
    AffineCellMap::from_vertices(mesh.dim, &p[..mesh.dim + 1]).map_err(|e| match e {
        Error::DegenerateCell { volume, .. } => Error::DegenerateCell { cell: c, volume },
        other => other,
    })
}

/// Serializes a mesh in the line-oriented text format: header
/// `dim nv nc level domain_tag`, one line of coordinates per vertex, one line
/// of 0-based vertex indices per cell, and one line of boundary flags.
pub fn write_mesh(mesh: &SimplicialMesh, out: &mut impl std::io::Write) -> std::io::Result<()> {
    writeln!(
        out,
        "{} {} {} {} {}",
        mesh.dim,
        mesh.n_vertices(),
        mesh.n_cells(),
        mesh.level,
        mesh.domain
    )?;
    for i in 0..mesh.n_vertices() {
        let line: Vec<String> = mesh.vertex(i).iter().map(|x| format!("{x:.16e}")).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    for cell in mesh.cells() {
        let line: Vec<String> = cell.iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    let flags: Vec<&str> = mesh.boundary.iter().map(|&b| if b { "1" } else { "0" }).collect();
    writeln!(out, "{}", flags.join(" "))
}

pub fn mesh_to_string(mesh: &SimplicialMesh) -> String {
    let mut buf = Vec::new();
    write_mesh(mesh, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("mesh text is ASCII")
}

/// Parses the text format written by [`write_mesh`] and validates the result.
/// Blank lines are skipped.
pub fn parse_mesh(text: &str) -> Result<SimplicialMesh> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let parse_err = |line: usize, message: String| Error::Parse { line, message };

    let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "empty input".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 5 {
        return Err(parse_err(hline, format!("expected 5 header fields, found {}", fields.len())));
    }
    let num = |s: &str| s.parse::<usize>().map_err(|e| parse_err(hline, format!("`{s}`: {e}")));
    let dim = num(fields[0])?;
    let nv = num(fields[1])?;
    let nc = num(fields[2])?;
    let level = num(fields[3])?;
    let domain: DomainTag = fields[4].parse().map_err(|e: Error| parse_err(hline, e.to_string()))?;
    if dim != 1 && dim != 3 {
        return Err(parse_err(hline, format!("dimension must be 1 or 3, got {dim}")));
    }

    let mut coords = Vec::with_capacity(nv * dim);
    for _ in 0..nv {
        let (ln, l) = lines.next().ok_or_else(|| parse_err(hline, "missing vertex lines".into()))?;
        let row: Vec<f64> = l
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|e| parse_err(ln, format!("`{t}`: {e}"))))
            .collect::<Result<_>>()?;
        if row.len() != dim {
            return Err(parse_err(ln, format!("expected {dim} coordinates, found {}", row.len())));
        }
        coords.extend(row);
    }
    let mut cells = Vec::with_capacity(nc * (dim + 1));
    for _ in 0..nc {
        let (ln, l) = lines.next().ok_or_else(|| parse_err(hline, "missing cell lines".into()))?;
        let row: Vec<usize> = l
            .split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|e| parse_err(ln, format!("`{t}`: {e}"))))
            .collect::<Result<_>>()?;
        if row.len() != dim + 1 {
            return Err(parse_err(ln, format!("expected {} vertex indices, found {}", dim + 1, row.len())));
        }
        cells.extend(row);
    }
    let (ln, l) = lines.next().ok_or_else(|| parse_err(hline, "missing boundary flag line".into()))?;
    let boundary: Vec<bool> = l
        .split_whitespace()
        .map(|t| match t {
            "0" => Ok(false),
            "1" => Ok(true),
            other => Err(parse_err(ln, format!("boundary flag must be 0 or 1, got `{other}`"))),
        })
        .collect::<Result<_>>()?;
    if boundary.len() != nv {
        return Err(parse_err(ln, format!("expected {nv} boundary flags, found {}", boundary.len())));
    }
    if let Some((ln, _)) = lines.next() {
        return Err(parse_err(ln, "trailing content".into()));
    }
    SimplicialMesh::from_parts(dim, coords, cells, boundary, level, domain)
}
