//! DtN finite element solver for time-harmonic fluid-solid scattering in 2D.
//!
//! An elastic disc of radius `R0` sits in a compressible fluid and is hit by a
//! plane acoustic wave. The fluid is truncated at a circle of radius `R` where
//! a Fourier-series Dirichlet-to-Neumann (DtN) condition, cut off after `N`
//! modes, stands in for the unbounded exterior. Displacement (disc) and
//! scattered pressure (annulus) are discretised with P1 elements and coupled
//! weakly across the interface.
//!
//! The crate is organised bottom-up:
//!
//! * [`special`] - Bessel and Hankel functions, DtN mode coefficients.
//! * [`mesh`] - structured polar meshes of the disc and the annulus.
//! * [`dtn`] - truncated DtN operator on the outer boundary trace.
//! * [`assembly`] - sparse system assembly of the coupled weak form.
//! * [`solve`] - direct sparse solve and field evaluation.
//! * [`analytic`] - modal series solution used as the reference.
//! * [`harness`] - error norms, convergence and truncation studies, config files.

// `!(x > 0.0)` rejects NaN on purpose; index loops mirror the formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analytic;
pub mod assembly;
pub mod config;
pub mod dtn;
mod error;
pub mod exec;
pub mod harness;
pub mod mesh;
pub mod quadrature;
pub mod solve;
pub mod sparse;
pub mod special;

pub use error::{Error, Result};
pub use exec::Exec;
pub use num_complex::Complex64;
