use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hardy_fem::analytic::{minseq_report, CutoffParams};
use hardy_fem::assembly::{DofMap, Measure};
use hardy_fem::mesh::{build_ball_mesh, build_interval_mesh, quality, write_mesh, BallBoundary, SimplicialMesh};
use hardy_fem::radial::{assemble_pencil, RadialKind};
use hardy_fem::rate::{fit_rate, RateModel};
use hardy_fem::report::{parse_csv, to_csv, to_json};
use hardy_fem::study::{run_study, verify_lemmas, StudyDomain, StudyReport, StudySpec};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "hardy-fem", version, about = "Finite element approximation of the Hardy constant and related eigenvalues")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mesh statistics per level; optionally write the finest mesh.
    MeshInfo(MeshArgs),
    /// Discrete Hardy constant `Λ_h` per level.
    Hardy(StudyArgs),
    /// Critical eigenvalue `μ_1h` per level.
    Critical(StudyArgs),
    /// Subcritical eigenvalue `λ_1h` per level (needs `--lambda`).
    Subcritical(StudyArgs),
    /// Any radial problem kind (`--kind`), always one-dimensional.
    Radial(RadialArgs),
    /// Hardy quotient of the truncated singular profiles.
    Minseq(MinseqArgs),
    /// Run the named lemma checks.
    Verify(VerifyArgs),
    /// Fit a rate to the `(h, error)` columns of a CSV report.
    Fit(FitArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Boundary {
    Projected,
    Polyhedral,
}

impl From<Boundary> for BallBoundary {
    fn from(b: Boundary) -> Self {
        match b {
            Boundary::Projected => BallBoundary::Projected,
            Boundary::Polyhedral => BallBoundary::Polyhedral,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    PowerInH,
    PowerInLog,
}

#[derive(Args, Clone)]
struct Common {
    /// 1 for the radial reduction, 3 for ball meshes.
    #[arg(long, default_value_t = 1, value_parser = parse_dim)]
    dim: usize,
    /// Ambient dimension of the radial problem.
    #[arg(long = "N", default_value_t = 3, value_parser = clap::value_parser!(u32).range(3..))]
    n: u32,
    /// Level range `a..b` (inclusive); radial level k has 2^k cells.
    #[arg(long, value_parser = parse_levels)]
    levels: Option<Levels>,
    #[arg(long, default_value = "projected")]
    boundary: Boundary,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct MeshArgs {
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct StudyArgs {
    #[command(flatten)]
    common: Common,
    /// Potential amplitude `Λ` (subcritical only).
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,
    /// Write the pencil of the finest level as `<prefix>_q.txt` and `<prefix>_b.txt`.
    #[arg(long)]
    export: Option<PathBuf>,
}

#[derive(Args)]
struct RadialArgs {
    #[command(flatten)]
    study: StudyArgs,
    #[arg(long, default_value = "hardy", value_parser = parse_kind)]
    kind: RadialKind,
}

#[derive(Args)]
struct MinseqArgs {
    #[arg(long = "N", default_value_t = 3, value_parser = clap::value_parser!(u32).range(3..))]
    n: u32,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 0.25)]
    mu: f64,
    /// Comma-separated values of ε.
    #[arg(long, value_delimiter = ',', default_value = "0.0625,0.03125,0.015625,0.0078125,0.00390625,0.001953125")]
    eps: Vec<f64>,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct VerifyArgs {
    /// Checks to run (comma-separated); all when absent.
    #[arg(long, value_delimiter = ',')]
    check: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    /// CSV report to read.
    input: PathBuf,
    #[arg(long, default_value = "power-in-log")]
    model: Model,
    /// Only use rows with `h <= max_h`.
    #[arg(long)]
    max_h: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug)]
struct Levels(usize, usize);

impl Levels {
    fn to_vec(self) -> Vec<usize> {
        (self.0..=self.1).collect()
    }
}

fn parse_levels(s: &str) -> std::result::Result<Levels, String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("expected a..b, got {s:?}"))?;
    let a: usize = a.trim().parse().map_err(|_| format!("bad level {a:?}"))?;
    let b: usize = b.trim().trim_start_matches('=').parse().map_err(|_| format!("bad level {b:?}"))?;
    if b < a {
        return Err(format!("empty level range {s:?}"));
    }
    Ok(Levels(a, b))
}

fn parse_dim(s: &str) -> std::result::Result<usize, String> {
    match s {
        "1" => Ok(1),
        "3" => Ok(3),
        _ => Err(format!("dimension must be 1 or 3, got {s:?}")),
    }
}

fn parse_kind(s: &str) -> std::result::Result<RadialKind, String> {
    s.parse().map_err(|e: hardy_fem::Error| e.to_string())
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn default_levels(dim: usize) -> Levels {
    if dim == 1 {
        Levels(6, 14)
    } else {
        Levels(1, 4)
    }
}

fn domain(c: &Common) -> StudyDomain {
    if c.dim == 1 {
        StudyDomain::Radial { n: c.n as usize }
    } else {
        StudyDomain::Ball { boundary: c.boundary.into() }
    }
}

fn build_mesh(c: &Common, level: usize) -> Result<SimplicialMesh> {
    Ok(if c.dim == 1 {
        build_interval_mesh(1 << level, 1.0)?
    } else {
        build_ball_mesh(level, c.boundary.into())
    })
}

#[derive(Serialize)]
struct MeshRow {
    level: usize,
    vertices: usize,
    cells: usize,
    dofs: usize,
    h: f64,
    h_min: f64,
    sigma: f64,
    quasi_uniform_ratio: f64,
}

fn mesh_info(args: &MeshArgs) -> Result<()> {
    let c = &args.common;
    let levels = c.levels.unwrap_or(if c.dim == 1 { Levels(2, 6) } else { Levels(0, 3) });
    let mut rows = Vec::new();
    let mut last = None;
    for level in levels.to_vec() {
        let mesh = build_mesh(c, level)?;
        let q = quality(&mesh)?;
        rows.push(MeshRow {
            level,
            vertices: mesh.n_vertices(),
            cells: mesh.n_cells(),
            dofs: DofMap::new(&mesh).n_dofs(),
            h: q.h,
            h_min: q.h_min,
            sigma: q.sigma,
            quasi_uniform_ratio: q.quasi_uniform_ratio,
        });
        last = Some(mesh);
    }
    let table = match c.format {
        Format::Json => to_json(&rows)?,
        Format::Csv => {
            let mut s = String::from("level,vertices,cells,dofs,h,h_min,sigma,quasi_uniform_ratio\n");
            for r in &rows {
                s.push_str(&format!(
                    "{},{},{},{},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                    r.level, r.vertices, r.cells, r.dofs, r.h, r.h_min, r.sigma, r.quasi_uniform_ratio
                ));
            }
            s
        }
    };
    match (&c.out, last) {
        // with --out the finest mesh goes to the file and the table to stdout
        (Some(path), Some(mesh)) => {
            let mut f = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
            write_mesh(&mesh, &mut f)?;
            emit(&None, &table)
        }
        _ => emit(&None, &table),
    }
}

fn write_report(report: &StudyReport, out: &Option<PathBuf>, format: Format) -> Result<()> {
    let text = match format {
        Format::Csv => to_csv(&report.rows)?,
        Format::Json => to_json(report)?,
    };
    emit(out, &text)?;
    match &report.fit {
        Some(fit) => eprintln!(
            "fit {}: p = {:.6}, C = {:.6e}, r^2 = {:.6}",
            fit.model, fit.exponent, fit.constant, fit.r_squared
        ),
        None => eprintln!("no rate fit: {}", report.metadata.get("fit_error").map_or("", String::as_str)),
    }
    Ok(())
}

fn study(kind: RadialKind, args: &StudyArgs) -> Result<()> {
    let c = &args.common;
    let lambda = match (kind, args.lambda) {
        (RadialKind::Subcritical, None) => bail!("the subcritical problem needs --lambda"),
        (_, l) => l.unwrap_or(0.0),
    };
    let mut spec = StudySpec::new(kind, domain(c), lambda, c.levels.unwrap_or(default_levels(c.dim)).to_vec());
    spec.tol = c.tol;
    let report = run_study(&spec)?;
    if let Some(prefix) = &args.export {
        let level = *spec.levels.last().expect("levels are nonempty");
        let mesh = build_mesh(c, level)?;
        let measure = if c.dim == 1 { Measure::Radial(c.n as usize) } else { Measure::Lebesgue };
        let (q, b) = assemble_pencil(kind, lambda, &mesh, measure)?;
        for (suffix, m) in [("q", &q), ("b", &b)] {
            let path = PathBuf::from(format!("{}_{suffix}.txt", prefix.display()));
            fs::write(&path, m.to_coordinate_string()).with_context(|| format!("writing {}", path.display()))?;
        }
    }
    write_report(&report, &c.out, c.format)
}

#[derive(Serialize)]
struct MinseqRow {
    eps: f64,
    log_eps: f64,
    a_eps: f64,
    b_eps: f64,
    ratio: f64,
    b_scaled: f64,
    a_scaled: f64,
    ratio_scaled: f64,
}

fn minseq(args: &MinseqArgs) -> Result<()> {
    let mut rows = Vec::new();
    for &eps in &args.eps {
        let p = CutoffParams::new(eps, args.mu, args.alpha, args.n as usize)?;
        let rep = minseq_report(&p, args.tol)?;
        let l = eps.ln().abs();
        rows.push(MinseqRow {
            eps,
            log_eps: l,
            a_eps: rep.a_eps,
            b_eps: rep.b_eps,
            ratio: rep.ratio,
            b_scaled: rep.b_eps / l.powf(2.0 * args.alpha + 1.0),
            a_scaled: rep.a_eps / l.powf(2.0 * args.alpha - 1.0),
            ratio_scaled: rep.ratio * l * l,
        });
    }
    let text = match args.format {
        Format::Json => to_json(&rows)?,
        Format::Csv => {
            let mut s = String::from("eps,log_eps,a_eps,b_eps,ratio,b_scaled,a_scaled,ratio_scaled\n");
            for r in &rows {
                s.push_str(&format!(
                    "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                    r.eps, r.log_eps, r.a_eps, r.b_eps, r.ratio, r.b_scaled, r.a_scaled, r.ratio_scaled
                ));
            }
            s
        }
    };
    emit(&args.out, &text)
}

fn verify(args: &VerifyArgs) -> Result<bool> {
    let report = verify_lemmas(&args.check)?;
    for c in &report.checks {
        eprintln!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    emit(&args.out, &to_json(&report)?)?;
    Ok(report.all_passed())
}

fn fit(args: &FitArgs) -> Result<()> {
    let text = fs::read_to_string(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let rows = parse_csv(&text)?;
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| args.max_h.is_none_or(|m| r.h <= m))
        .filter_map(|r| r.error.map(|e| (r.h, e)))
        .collect();
    let model = match args.model {
        Model::PowerInH => RateModel::PowerInH,
        Model::PowerInLog => RateModel::PowerInLog,
    };
    let fit = fit_rate(&points, model)?;
    emit(&args.out, &to_json(&fit)?)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::MeshInfo(a) => mesh_info(&a)?,
        Command::Hardy(a) => study(RadialKind::Hardy, &a)?,
        Command::Critical(a) => study(RadialKind::Critical, &a)?,
        Command::Subcritical(a) => study(RadialKind::Subcritical, &a)?,
        Command::Radial(mut a) => {
            a.study.common.dim = 1;
            study(a.kind, &a.study)?
        }
        Command::Minseq(a) => minseq(&a)?,
        Command::Verify(a) => return verify(&a),
        Command::Fit(a) => fit(&a)?,
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            // bad parameters are usage errors; anything else is a failed run
            match e.downcast_ref::<hardy_fem::Error>() {
                Some(hardy_fem::Error::InvalidArgument(_)) | Some(hardy_fem::Error::Unsupported(_)) => ExitCode::from(2),
                _ if e.to_string().contains("--lambda") => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
