//! Radial reduction: weighted P1 elements on `[0, 1]` with measure
//! `r^{N-1} dr`. The vertex `r = 0` carries a free dof and `r = 1` is
//! Dirichlet. Surface factors cancel in every quotient and are dropped.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analytic::{bessel_first_zero, hardy_const};
use crate::assembly::{assemble_form, Form, Measure, DEFAULT_R_LOG, DEFAULT_TOL};
use crate::eigensolve::{ambient_dimension, smallest_genevp, EigSolution, DEFAULT_EIG_TOL, DEFAULT_MAX_ITER};
use crate::error::{invalid, Error, Result};
use crate::mesh::{build_interval_mesh, SimplicialMesh};
use crate::sparse::SparseSym;

/// Which Rayleigh quotient to minimize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadialKind {
    /// `∫u'² / ∫u²/r²`
    Hardy,
    /// `(∫u'² - Λ_N ∫u²/r²) / ∫u²`
    Critical,
    /// `(∫u'² - Λ ∫u²/r²) / ∫u²`, `Λ < Λ_N`
    Subcritical,
    /// The critical problem after `u = r^{-(N-2)/2} v`: `∫r^{-(N-2)}v'² / ∫r^{-(N-2)}v²`.
    WeightedMu,
    /// `(∫u'² - Λ_N ∫u²/r²) / ∫u²/(r² log²(R/r))`
    LogHardy,
}

impl RadialKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RadialKind::Hardy => "hardy",
            RadialKind::Critical => "critical",
            RadialKind::Subcritical => "subcritical",
            RadialKind::WeightedMu => "weighted_mu",
            RadialKind::LogHardy => "log_hardy",
        }
    }
}

impl fmt::Display for RadialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RadialKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "hardy" => RadialKind::Hardy,
            "critical" => RadialKind::Critical,
            "subcritical" => RadialKind::Subcritical,
            "weighted_mu" | "weighted-mu" => RadialKind::WeightedMu,
            "log_hardy" | "log-hardy" => RadialKind::LogHardy,
            other => return Err(invalid(format!("unknown radial problem kind {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialProblem {
    pub n: usize,
    /// Potential amplitude `Λ`; only read by the subcritical kind.
    pub lambda_amp: f64,
    pub kind: RadialKind,
}

impl RadialProblem {
    pub fn new(n: usize, kind: RadialKind, lambda_amp: f64) -> Result<Self> {
        let p = RadialProblem { n, lambda_amp, kind };
        p.check()?;
        Ok(p)
    }

    pub fn hardy(n: usize) -> Result<Self> {
        Self::new(n, RadialKind::Hardy, 0.0)
    }

    pub fn critical(n: usize) -> Result<Self> {
        Self::new(n, RadialKind::Critical, 0.0)
    }

    pub fn subcritical(n: usize, lambda: f64) -> Result<Self> {
        Self::new(n, RadialKind::Subcritical, lambda)
    }

    fn check(&self) -> Result<()> {
        let cap = hardy_const(self.n)?;
        if self.kind == RadialKind::Subcritical && !(0.0..cap).contains(&self.lambda_amp) {
            return Err(invalid(format!(
                "subcritical amplitude must satisfy 0 <= Λ < {cap}, got {}",
                self.lambda_amp
            )));
        }
        Ok(())
    }

    /// Exact infimum of the continuous quotient on the unit ball.
    pub fn reference(&self) -> Result<f64> {
        self.check()?;
        let cap = hardy_const(self.n)?;
        Ok(match self.kind {
            RadialKind::Hardy | RadialKind::LogHardy => cap,
            RadialKind::Critical | RadialKind::WeightedMu => bessel_first_zero(0.0)?.powi(2),
            RadialKind::Subcritical => bessel_first_zero((cap - self.lambda_amp).sqrt())?.powi(2),
        })
    }

    /// Bessel order `m = sqrt(Λ_N - Λ)` of the first eigenfunction (0 for critical kinds).
    pub fn bessel_order(&self) -> Result<f64> {
        let cap = hardy_const(self.n)?;
        Ok(match self.kind {
            RadialKind::Subcritical => (cap - self.lambda_amp).sqrt(),
            _ => 0.0,
        })
    }
}

/// `(Q, B)` for the problem on a 1D mesh of `[0, 1]`.
pub fn radial_assemble(problem: &RadialProblem, mesh: &SimplicialMesh) -> Result<(SparseSym, SparseSym)> {
    problem.check()?;
    if mesh.dim() != 1 {
        return Err(Error::Unsupported(format!("radial assembly on a {}D mesh", mesh.dim())));
    }
    assemble_pencil(problem.kind, problem.lambda_amp, mesh, Measure::Radial(problem.n))
}

/// `(Q, B)` for any problem kind on a 1D radial or 3D ball mesh.
pub fn assemble_pencil(
    kind: RadialKind,
    lambda: f64,
    mesh: &SimplicialMesh,
    measure: Measure,
) -> Result<(SparseSym, SparseSym)> {
    let n = ambient_dimension(mesh, measure)?;
    let form = |f: Form| assemble_form(mesh, f, measure, DEFAULT_TOL);
    let with_potential = |lambda: f64| -> Result<SparseSym> {
        let a = form(Form::Stiffness)?;
        if lambda == 0.0 {
            return Ok(a);
        }
        SparseSym::combine(1.0, &a, -lambda, &form(Form::HardyMass)?)
    };
    let cap = hardy_const(n)?;
    if kind == RadialKind::Subcritical && !(0.0..cap).contains(&lambda) {
        return Err(invalid(format!("subcritical amplitude must satisfy 0 <= Λ < {cap}, got {lambda}")));
    }
    Ok(match kind {
        RadialKind::Hardy => (form(Form::Stiffness)?, form(Form::HardyMass)?),
        RadialKind::Critical => (with_potential(cap)?, form(Form::Mass)?),
        RadialKind::Subcritical => (with_potential(lambda)?, form(Form::Mass)?),
        RadialKind::WeightedMu => (form(Form::MuStiffness { n })?, form(Form::MuMass { n })?),
        RadialKind::LogHardy => (with_potential(cap)?, form(Form::LogHardyMass { r_log: DEFAULT_R_LOG })?),
    })
}

/// Smallest eigenpair on a mesh of `n_cells` cells (`grading = 1` is uniform).
pub fn radial_solve(problem: &RadialProblem, n_cells: usize, grading: f64) -> Result<EigSolution> {
    let mesh = build_interval_mesh(n_cells, grading)?;
    let (q, b) = radial_assemble(problem, &mesh)?;
    smallest_genevp(&q, &b, DEFAULT_EIG_TOL, DEFAULT_MAX_ITER)
}

/// `(h, value)` for each uniform mesh in `levels` (cell counts, increasing).
pub fn radial_rate_study(problem: &RadialProblem, levels: &[usize]) -> Result<Vec<(f64, f64)>> {
    if levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("levels must be strictly increasing"));
    }
    levels
        .iter()
        .map(|&n| Ok((1.0 / n as f64, radial_solve(problem, n, 1.0)?.value)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn hand_entries() {
        let mesh = build_interval_mesh(2, 1.0).unwrap();
        let (a, w) = radial_assemble(&RadialProblem::hardy(3).unwrap(), &mesh).unwrap();
        assert_relative_eq!(w.get(0, 0), 1.0 / 6.0, max_relative = 1e-12);
        assert_relative_eq!(a.get(1, 1), 4.0 / 3.0, max_relative = 1e-12);
    }

    #[test]
    fn subcritical_amplitude_range() {
        assert!(RadialProblem::subcritical(3, 0.25).is_err());
        assert!(RadialProblem::subcritical(3, -0.1).is_err());
        assert!(RadialProblem::hardy(2).is_err());
    }

    #[test]
    fn references() {
        assert_relative_eq!(
            RadialProblem::subcritical(3, 0.0).unwrap().reference().unwrap(),
            std::f64::consts::PI.powi(2),
            max_relative = 1e-13
        );
        assert_relative_eq!(
            RadialProblem::critical(3).unwrap().reference().unwrap(),
            5.783185962946784,
            max_relative = 1e-12
        );
    }

    #[test]
    fn kind_strings() {
        for k in [
            RadialKind::Hardy,
            RadialKind::Critical,
            RadialKind::Subcritical,
            RadialKind::WeightedMu,
            RadialKind::LogHardy,
        ] {
            assert_eq!(k.as_str().parse::<RadialKind>().unwrap(), k);
        }
    }
}
