use std::fs;
use std::process::{Command, Output};

use hardy_fem::mesh::parse_mesh;
use hardy_fem::report::{parse_csv, report_from_json, CSV_HEADER};
use hardy_fem::sparse::SparseSym;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hardy-fem")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(run(&["hardy", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["subcritical", "--levels", "3..5"]).status.code(), Some(2));
    assert_eq!(run(&["hardy", "--dim", "2"]).status.code(), Some(2));
    assert_eq!(run(&["subcritical", "--levels", "3..5", "--lambda", "0.5"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--check", "nonsense"]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn hardy_csv_report() {
    let o = run(&["hardy", "--levels", "3..6"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
    let rows = parse_csv(&text).unwrap();
    assert_eq!(rows.iter().map(|r| r.level).collect::<Vec<_>>(), [3, 4, 5, 6]);
    assert!(rows.iter().all(|r| r.value > 0.25 && r.reference == Some(0.25)));
}

#[test]
fn subcritical_json_report_and_export() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let prefix = dir.path().join("pencil");
    let o = run(&[
        "subcritical",
        "--lambda",
        "0.1",
        "--levels",
        "4..7",
        "--format",
        "json",
        "--out",
        out.to_str().unwrap(),
        "--export",
        prefix.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = report_from_json(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report.rows.len(), 4);
    assert!(report.fit.is_some());
    let q = SparseSym::parse_coordinate(&fs::read_to_string(dir.path().join("pencil_q.txt")).unwrap()).unwrap();
    let b = SparseSym::parse_coordinate(&fs::read_to_string(dir.path().join("pencil_b.txt")).unwrap()).unwrap();
    assert_eq!(q.n(), 128);
    assert_eq!(b.n(), report.rows.last().unwrap().dofs);
}

#[test]
fn radial_kinds() {
    for kind in ["hardy", "critical", "weighted_mu", "log_hardy"] {
        let o = run(&["radial", "--kind", kind, "--levels", "3..5", "--N", "4"]);
        assert!(o.status.success(), "{kind}: {}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(parse_csv(&stdout(&o)).unwrap().len(), 3);
    }
    assert_eq!(run(&["radial", "--kind", "nope"]).status.code(), Some(2));
}

#[test]
fn mesh_info_writes_the_finest_mesh() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ball.mesh");
    let o = run(&["mesh-info", "--dim", "3", "--levels", "0..2", "--boundary", "polyhedral", "--out", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.starts_with("level,vertices,cells,dofs,h,h_min,sigma,quasi_uniform_ratio\n"));
    assert_eq!(text.lines().count(), 4);
    let mesh = parse_mesh(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(mesh.n_cells(), 8 * 64);
}

#[test]
fn fit_reads_a_csv_report() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sub.csv");
    let o = run(&["subcritical", "--lambda", "0", "--levels", "4..8", "--out", csv.to_str().unwrap()]);
    assert!(o.status.success());
    let o = run(&["fit", csv.to_str().unwrap(), "--model", "power-in-h"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let fit: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let p = fit["exponent"].as_f64().unwrap();
    assert!((1.7..=2.3).contains(&p), "{p}");
    assert_eq!(fit["model"], "power_in_h");
}

#[test]
fn minseq_table() {
    let o = run(&["minseq", "--eps", "0.01,0.001", "--format", "json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 2);
    assert!(rows[0]["ratio"].as_f64().unwrap() > 0.0);
}

#[test]
fn verify_emits_json() {
    let o = run(&["verify", "--check", "quadrature"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["checks"][0]["name"], "quadrature");
    assert_eq!(v["checks"][0]["passed"], true);
    assert!(String::from_utf8_lossy(&o.stderr).contains("PASS quadrature"));
}
