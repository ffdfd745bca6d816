//! P1 finite element approximation of the Hardy constant `(N-2)^2/4` and of
//! the first eigenvalues of the Laplacian perturbed by the inverse-square
//! potential `-Λ/|x|^2`, on meshes of the unit ball in `R^3` and on radial
//! (one-dimensional, weighted) meshes in any dimension `N >= 3`.
//!
//! The crate is organised bottom-up:
//!
//! * [`mesh`] builds and refines simplicial meshes of `[0, 1]` and of the ball;
//! * [`quadrature`] integrates on simplices, including weights singular at the origin;
//! * [`sparse`] holds the symmetric sparse matrix type and its envelope Cholesky factor;
//! * [`assembly`] builds the Galerkin matrices of every quadratic form involved;
//! * [`eigensolve`] computes smallest generalized eigenpairs and the three spectral constants;
//! * [`analytic`] provides reference values: Bessel functions, exact eigenfunctions and
//!   the truncated minimizing sequence for the Hardy quotient;
//! * [`radial`] is the one-dimensional weighted oracle used for high-resolution rates;
//! * [`rate`], [`study`] and [`report`] fit convergence rates and run the experiments.

// `!(x > 0.0)` style checks are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analytic;
pub mod assembly;
pub mod eigensolve;
pub mod error;
pub mod mesh;
pub mod quadrature;
pub mod radial;
pub mod rate;
pub mod report;
pub mod sparse;
pub mod study;

mod par;

pub use error::{Error, Result};
