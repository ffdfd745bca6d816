use hardy_fem::assembly::{
    assemble_form, assemble_hardy_mass, assemble_log_hardy_mass, assemble_log_stiffness, assemble_mass,
    assemble_mu_weighted, assemble_stiffness, extend_by_zero, interpolate, DofMap, Form, Measure, DEFAULT_R_LOG,
};
use hardy_fem::eigensolve::{hardy_constant, smallest_genevp};
use hardy_fem::mesh::{build_ball_mesh, build_interval_mesh, BallBoundary, SimplicialMesh};
use hardy_fem::rate::band_ratio;
use hardy_fem::sparse::{quadratic_form, Cholesky, SparseSym};
use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn norm(p: &[f64; 3]) -> f64 {
    (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt()
}

fn hardy_deficit(mesh: &SimplicialMesh, measure: Measure) -> (SparseSym, SparseSym) {
    let a = assemble_form(mesh, Form::Stiffness, measure, 1e-10).unwrap();
    let w = assemble_form(mesh, Form::HardyMass, measure, 1e-10).unwrap();
    (SparseSym::combine(1.0, &a, -0.25, &w).unwrap(), a)
}

/// Vertices adjacent to `v` through some cell, and the cells containing it.
fn patch(mesh: &SimplicialMesh, v: usize) -> (Vec<usize>, Vec<usize>) {
    let mut nbrs = Vec::new();
    let mut cells = Vec::new();
    for c in 0..mesh.n_cells() {
        if mesh.cell(c).contains(&v) {
            cells.push(c);
            nbrs.extend(mesh.cell(c).iter().copied().filter(|&u| u != v));
        }
    }
    nbrs.sort_unstable();
    nbrs.dedup();
    (nbrs, cells)
}

#[test]
fn matrices_are_positive_definite() {
    let ball = build_ball_mesh(1, BallBoundary::Projected);
    let (mu_a, mu_m) = assemble_mu_weighted(&ball, 3).unwrap();
    let mats = [
        assemble_stiffness(&ball).unwrap(),
        assemble_mass(&ball).unwrap(),
        assemble_hardy_mass(&ball).unwrap(),
        assemble_log_hardy_mass(&ball, DEFAULT_R_LOG).unwrap(),
        assemble_log_stiffness(&ball, DEFAULT_R_LOG).unwrap(),
        mu_a,
        mu_m,
    ];
    for m in &mats {
        Cholesky::factor(m).unwrap();
        for (i, j, v) in m.triplets() {
            assert_eq!(v, m.get(j, i));
            assert!(i >= j);
        }
    }
    let line = build_interval_mesh(32, 1.0).unwrap();
    for form in [
        Form::Stiffness,
        Form::Mass,
        Form::HardyMass,
        Form::LogHardyMass { r_log: DEFAULT_R_LOG },
        Form::LogStiffness { r_log: DEFAULT_R_LOG },
        Form::MuStiffness { n: 3 },
        Form::MuMass { n: 3 },
    ] {
        Cholesky::factor(&assemble_form(&line, form, Measure::Radial(3), 1e-10).unwrap()).unwrap();
    }
}

#[test]
fn discrete_hardy_inequality_on_random_vectors() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let meshes = [
        (build_interval_mesh(64, 1.0).unwrap(), Measure::Radial(3)),
        (build_interval_mesh(50, 2.0).unwrap(), Measure::Radial(3)),
        (build_ball_mesh(2, BallBoundary::Projected), Measure::Lebesgue),
        (build_ball_mesh(2, BallBoundary::Polyhedral), Measure::Lebesgue),
    ];
    for (mesh, measure) in &meshes {
        let (q, a) = hardy_deficit(mesh, *measure);
        for _ in 0..1000 {
            let x: Vec<f64> = (0..q.n()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let deficit = quadratic_form(&q, &x).unwrap();
            assert!(deficit >= -1e-12 * quadratic_form(&a, &x).unwrap(), "{deficit}");
        }
    }
}

#[test]
fn stiffness_matches_direct_gradient_energy() {
    let mesh = build_ball_mesh(2, BallBoundary::Projected);
    let a = assemble_stiffness(&mesh).unwrap();
    let x = interpolate(&mesh, |p| (1.0 - p.iter().map(|v| v * v).sum::<f64>()) * (1.0 + p[0] - 0.5 * p[1] * p[2])).unwrap();
    let full = extend_by_zero(&mesh, &x).unwrap();
    let mut direct = 0.0;
    for c in 0..mesh.n_cells() {
        let p = mesh.cell_points(c);
        let cell = mesh.cell(c);
        let e = |k: usize| Vector3::new(p[k][0] - p[0][0], p[k][1] - p[0][1], p[k][2] - p[0][2]);
        let b = Matrix3::from_columns(&[e(1), e(2), e(3)]);
        let du = Vector3::new(full[cell[1]] - full[cell[0]], full[cell[2]] - full[cell[0]], full[cell[3]] - full[cell[0]]);
        let grad = b.transpose().try_inverse().unwrap() * du;
        direct += grad.norm_squared() * b.determinant().abs() / 6.0;
    }
    let assembled = quadratic_form(&a, &x).unwrap();
    assert!((assembled - direct).abs() <= 1e-12 * direct, "{assembled} vs {direct}");
}

#[test]
fn row_sums_on_interior_patches() {
    let mesh = build_ball_mesh(2, BallBoundary::Projected);
    let dofs = DofMap::new(&mesh);
    let a = assemble_stiffness(&mesh).unwrap();
    let m = assemble_mass(&mesh).unwrap();
    let ones = vec![1.0; dofs.n_dofs()];
    let (a1, m1) = (a.mul_vec(&ones).unwrap(), m.mul_vec(&ones).unwrap());
    let mut checked = 0;
    for d in 0..dofs.n_dofs() {
        let v = dofs.vertex(d);
        let (nbrs, cells) = patch(&mesh, v);
        if nbrs.iter().any(|&u| mesh.is_boundary(u)) {
            continue;
        }
        checked += 1;
        assert!(a1[d].abs() < 1e-12 * a.get(d, d), "dof {d}: {}", a1[d]);
        let vol: f64 = cells.iter().map(|&c| mesh.cell_volume(c)).sum();
        assert!((m1[d] - vol / 4.0).abs() < 1e-14, "dof {d}");
    }
    assert!(checked > 0);
}

#[test]
fn weighted_entries_obey_pointwise_bounds() {
    let mesh = build_ball_mesh(2, BallBoundary::Projected);
    let dofs = DofMap::new(&mesh);
    let m = assemble_mass(&mesh).unwrap();
    let w = assemble_hardy_mass(&mesh).unwrap();
    let wl = assemble_log_hardy_mass(&mesh, DEFAULT_R_LOG).unwrap();
    let a = assemble_stiffness(&mesh).unwrap();
    let l = assemble_log_stiffness(&mesh, DEFAULT_R_LOG).unwrap();
    let q = hardy_fem::mesh::quality(&mesh).unwrap();
    for (i, j, v) in w.triplets() {
        assert!(v >= 0.0);
        assert!(wl.get(i, j) <= v * (1.0 + 1e-10));
    }
    for d in 0..dofs.n_dofs() {
        assert!(l.get(d, d) <= a.get(d, d) * (1.0 + 1e-10));
        // dist(0, T) >= min vertex norm - diam T, and |x|^-2 <= dist^-2 on the patch
        let (_, cells) = patch(&mesh, dofs.vertex(d));
        let dist = cells
            .iter()
            .map(|&c| {
                let near = mesh.cell_points(c).iter().map(|p| norm(p)).fold(f64::INFINITY, f64::min);
                near - q.per_cell[c].0
            })
            .fold(f64::INFINITY, f64::min);
        if dist > 0.0 {
            assert!(w.get(d, d) <= m.get(d, d) / (dist * dist));
        }
        assert!(w.get(d, d) >= m.get(d, d) * (1.0 - 1e-10));
    }
}

#[test]
fn mu_weight_reduces_to_plain_forms_for_n2() {
    let mesh = build_ball_mesh(1, BallBoundary::Polyhedral);
    let (a2, m2) = assemble_mu_weighted(&mesh, 2).unwrap();
    assert_eq!(a2, assemble_stiffness(&mesh).unwrap());
    assert_eq!(m2, assemble_mass(&mesh).unwrap());
}

#[test]
fn hardy_constant_decreases_on_nested_meshes() {
    let values: Vec<f64> = (0..=2)
        .map(|l| hardy_constant(&build_ball_mesh(l, BallBoundary::Polyhedral), Measure::Lebesgue).unwrap().value)
        .collect();
    assert!(values.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{values:?}");
    assert!(values.iter().all(|&v| v >= 0.25 - 1e-9));
}

#[test]
fn improved_hardy_constant_is_mesh_independent() {
    let c = |mesh: &SimplicialMesh, measure: Measure| {
        let (q, _) = hardy_deficit(mesh, measure);
        let l = assemble_form(mesh, Form::LogStiffness { r_log: DEFAULT_R_LOG }, measure, 1e-10).unwrap();
        smallest_genevp(&q, &l, 1e-10, 5000).unwrap().value
    };
    let radial: Vec<f64> = (4..=11).map(|k| c(&build_interval_mesh(1 << k, 1.0).unwrap(), Measure::Radial(3))).collect();
    assert!(radial.iter().all(|&v| v > 0.0));
    assert!(band_ratio(&radial) <= 2.0, "{radial:?}");
    let ball: Vec<f64> = (1..=2).map(|l| c(&build_ball_mesh(l, BallBoundary::Projected), Measure::Lebesgue)).collect();
    assert!(ball.iter().all(|&v| v > 0.0));
    assert!(band_ratio(&ball) <= 2.0, "{ball:?}");
}
