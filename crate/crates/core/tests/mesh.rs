use hardy_fem::mesh::{
    build_ball_mesh, build_interval_mesh, cell_map, mesh_to_string, parse_mesh, prolongate, quality,
    reference_volume, refine_uniform, refine_with_parents, AffineCellMap, BallBoundary, SimplicialMesh,
};
use proptest::prelude::*;

fn total_volume(mesh: &SimplicialMesh) -> f64 {
    (0..mesh.n_cells()).map(|c| mesh.cell_volume(c)).sum()
}

fn norm(p: &[f64]) -> f64 {
    p.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn ball_family(boundary: BallBoundary) -> Vec<SimplicialMesh> {
    (0..=3).map(|l| build_ball_mesh(l, boundary)).collect()
}

#[test]
fn ball_meshes_satisfy_invariants() {
    for boundary in [BallBoundary::Projected, BallBoundary::Polyhedral] {
        for mesh in ball_family(boundary) {
            mesh.validate().unwrap();
            let o = mesh.origin_vertex().expect("origin is a vertex");
            assert!(!mesh.is_boundary(o));
            for v in 0..mesh.n_vertices() {
                assert!(norm(mesh.vertex(v)) <= 1.0 + 1e-12);
            }
            let q = quality(&mesh).unwrap();
            for &(h, rho) in &q.per_cell {
                assert!(rho > 0.0 && rho <= h);
                assert!(h / rho >= 2.0);
            }
        }
    }
}

#[test]
fn polyhedral_family_is_shape_regular() {
    let fam = ball_family(BallBoundary::Polyhedral);
    let q: Vec<_> = fam.iter().map(|m| quality(m).unwrap()).collect();
    let v0 = total_volume(&fam[0]);
    assert!((v0 - 4.0 / 3.0).abs() < 1e-14);
    for (k, m) in fam.iter().enumerate() {
        assert!((total_volume(m) - v0).abs() <= 1e-10 * v0);
        // measured on levels 0..=4: 1 at level 0, √(2/3) afterwards
        assert!(q[k].quasi_uniform_ratio >= 0.8164);
    }
    // the first red step adds the similarity classes of the interior children;
    // after that no new shapes appear
    assert!(q[0].sigma <= q[1].sigma);
    for k in 2..q.len() {
        assert!((q[k].sigma - q[1].sigma).abs() <= 1e-9, "level {k}: {} vs {}", q[k].sigma, q[1].sigma);
    }
    // level 0 has only the fan cells; the longest edge of later levels is an interior diagonal
    assert!((q[0].h - 2f64.sqrt()).abs() < 1e-15 && (q[1].h - 0.75f64.sqrt()).abs() < 1e-15);
    for k in 2..q.len() {
        assert!((q[k].h - 0.5 * q[k - 1].h).abs() <= 1e-12, "level {k}");
    }
}

#[test]
fn projected_volume_increases_below_ball_volume() {
    let vols: Vec<f64> = ball_family(BallBoundary::Projected).iter().map(total_volume).collect();
    let ball = 4.0 * std::f64::consts::PI / 3.0;
    assert!(vols.windows(2).all(|w| w[1] > w[0]), "{vols:?}");
    assert!(vols.iter().all(|&v| v < ball));
    // projected family measured once: quasi-uniformity does not collapse
    for m in ball_family(BallBoundary::Projected) {
        assert!(quality(&m).unwrap().quasi_uniform_ratio > 0.3);
    }
}

#[test]
fn cell_maps_match_vertex_determinants() {
    let mesh = build_ball_mesh(2, BallBoundary::Projected);
    for c in 0..mesh.n_cells() {
        let map = cell_map(&mesh, c).unwrap();
        let p = mesh.cell_points(c);
        let e = |k: usize| [p[k][0] - p[0][0], p[k][1] - p[0][1], p[k][2] - p[0][2]];
        let (a, b, d) = (e(1), e(2), e(3));
        let det = a[0] * (b[1] * d[2] - b[2] * d[1]) - a[1] * (b[0] * d[2] - b[2] * d[0]) + a[2] * (b[0] * d[1] - b[1] * d[0]);
        let vol = det.abs() / 6.0;
        assert!((map.det_abs * reference_volume(3) - vol).abs() <= 1e-12 * vol, "cell {c}");
        for k in 0..4 {
            let v = map.vertex(k);
            for i in 0..3 {
                assert!((v[i] - p[k][i]).abs() < 1e-15);
            }
        }
    }
}

#[test]
fn scaled_reference_cell_map() {
    let refc = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let twice: Vec<[f64; 3]> = refc.iter().map(|p| [2.0 * p[0], 2.0 * p[1], 2.0 * p[2]]).collect();
    assert!((AffineCellMap::from_vertices(3, &twice).unwrap().det_abs - 8.0).abs() < 1e-15);
    let seg = AffineCellMap::from_vertices(1, &[[0.0; 3], [2.0, 0.0, 0.0]]).unwrap();
    assert!((seg.det_abs - 2.0).abs() < 1e-15);
}

/// Insphere radius from barycentric gradients: `1/ρ = Σ |∇λ_i|`.
fn insphere_by_gradients(p: &[[f64; 3]]) -> f64 {
    let e = |k: usize| [p[k][0] - p[0][0], p[k][1] - p[0][1], p[k][2] - p[0][2]];
    let b = nalgebra::Matrix3::from_columns(&[e(1).into(), e(2).into(), e(3).into()]);
    let g = b.try_inverse().unwrap();
    let rows: Vec<nalgebra::Vector3<f64>> = (0..3).map(|i| g.row(i).transpose()).collect();
    let g0 = -(rows[0] + rows[1] + rows[2]);
    1.0 / (g0.norm() + rows.iter().map(|r| r.norm()).sum::<f64>())
}

#[test]
fn regular_tetrahedron_insphere() {
    let s3 = 3f64.sqrt();
    let p = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.5, s3 / 2.0, 0.0], [0.5, s3 / 6.0, (2.0f64 / 3.0).sqrt()]];
    assert!((insphere_by_gradients(&p) - 1.0 / (2.0 * 6f64.sqrt())).abs() < 1e-14);
}

#[test]
fn insphere_radii_match_gradient_formula() {
    let mesh = build_ball_mesh(2, BallBoundary::Projected);
    let q = quality(&mesh).unwrap();
    for c in 0..mesh.n_cells() {
        let rho = insphere_by_gradients(&mesh.cell_points(c));
        assert!((q.per_cell[c].1 - rho).abs() <= 1e-12 * rho, "cell {c}");
    }
}

#[test]
fn polyhedral_refinement_is_nested() {
    let coarse = build_ball_mesh(1, BallBoundary::Polyhedral);
    let (fine, parents) = refine_with_parents(&coarse);
    assert_eq!(fine.n_vertices(), coarse.n_vertices() + parents.len());
    for (k, &[a, b]) in parents.iter().enumerate() {
        let v = fine.vertex(coarse.n_vertices() + k);
        for i in 0..3 {
            assert!((v[i] - 0.5 * (coarse.vertex(a)[i] + coarse.vertex(b)[i])).abs() < 1e-15);
        }
    }
    // an arbitrary coarse P1 function survives prolongation and restriction
    let values: Vec<f64> = (0..coarse.n_vertices()).map(|v| (v as f64 * 0.37).sin()).collect();
    let fine_values = prolongate(&values, &parents);
    assert_eq!(&fine_values[..coarse.n_vertices()], &values[..]);
    // and is linear on every fine cell: the fine interpolant of a coarse affine function is exact
    let affine = |p: &[f64]| 1.0 + 2.0 * p[0] - p[1] + 0.5 * p[2];
    let coarse_affine: Vec<f64> = (0..coarse.n_vertices()).map(|v| affine(coarse.vertex(v))).collect();
    let lifted = prolongate(&coarse_affine, &parents);
    for v in 0..fine.n_vertices() {
        assert!((lifted[v] - affine(fine.vertex(v))).abs() < 1e-14);
    }
}

#[test]
fn refinement_counts() {
    let m = build_ball_mesh(0, BallBoundary::Polyhedral);
    let r = refine_uniform(&refine_uniform(&m));
    assert_eq!(r.n_cells(), 512);
    assert_eq!(r.n_vertices(), build_ball_mesh(2, BallBoundary::Polyhedral).n_vertices());
}

#[test]
fn mesh_text_round_trips_ball_meshes() {
    for boundary in [BallBoundary::Projected, BallBoundary::Polyhedral] {
        let mesh = build_ball_mesh(2, boundary);
        let back = parse_mesh(&mesh_to_string(&mesh)).unwrap();
        assert_eq!(back.n_vertices(), mesh.n_vertices());
        for v in 0..mesh.n_vertices() {
            assert_eq!(back.vertex(v), mesh.vertex(v));
            assert_eq!(back.is_boundary(v), mesh.is_boundary(v));
        }
        assert_eq!(back.cells().collect::<Vec<_>>(), mesh.cells().collect::<Vec<_>>());
        assert_eq!(back.level(), 2);
        assert_eq!(back.domain(), mesh.domain());
    }
}

proptest! {
    #[test]
    fn interval_meshes_are_valid(n in 2usize..400, grading in 1.0f64..4.0) {
        let mesh = build_interval_mesh(n, grading).unwrap();
        mesh.validate().unwrap();
        prop_assert_eq!(mesh.n_cells(), n);
        prop_assert_eq!(mesh.vertex(0)[0], 0.0);
        prop_assert_eq!(mesh.vertex(n)[0], 1.0);
        for v in 0..=n {
            prop_assert_eq!(mesh.is_boundary(v), v == n);
            if v > 0 {
                prop_assert!(mesh.vertex(v)[0] > mesh.vertex(v - 1)[0]);
            }
        }
        let q = quality(&mesh).unwrap();
        for &(h, rho) in &q.per_cell {
            prop_assert!((h / rho - 2.0).abs() < 1e-12);
        }
        prop_assert!(q.quasi_uniform_ratio > 0.0 && q.quasi_uniform_ratio <= 1.0);
    }

    #[test]
    fn interval_text_round_trip(n in 2usize..200, grading in 1.0f64..3.0) {
        let mesh = build_interval_mesh(n, grading).unwrap();
        let text = mesh_to_string(&mesh);
        let back = parse_mesh(&text).unwrap();
        prop_assert_eq!(mesh_to_string(&back), text);
        for v in 0..mesh.n_vertices() {
            prop_assert_eq!(back.vertex(v), mesh.vertex(v));
        }
    }

    #[test]
    fn interval_refinement_keeps_endpoints(n in 2usize..100, grading in 1.0f64..3.0) {
        let mesh = build_interval_mesh(n, grading).unwrap();
        let fine = refine_uniform(&mesh);
        prop_assert_eq!(fine.n_cells(), 2 * n);
        let xs: Vec<f64> = (0..fine.n_vertices()).map(|v| fine.vertex(v)[0]).collect();
        prop_assert_eq!(xs.iter().cloned().fold(f64::INFINITY, f64::min), 0.0);
        prop_assert_eq!(xs.iter().cloned().fold(0.0, f64::max), 1.0);
        prop_assert!((total_volume(&fine) - 1.0).abs() < 1e-14);
    }
}
