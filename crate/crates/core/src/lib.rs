//! Floquet-Liapunov reduction for periodic linear equations `x' = A(t) x` on
//! the projective tower `C^1 <- C^2 <- ... <- C^N`, a finite model of the
//! Fréchet space `C^∞`.
//!
//! The pipeline is levelwise:
//!
//! 1. [`ode::solve_fundamental`] integrates the fundamental solution of the top
//!    level; lower levels are truncations, so the samples form a projective
//!    system by construction.
//! 2. [`floquet::monodromy`] reads off `Φ(1)`, an invertible nested tower.
//! 3. [`linalg::compatible_log`] builds a logarithm tower level by level so
//!    that every level is again nested and `Exp` of it is the monodromy.
//! 4. [`floquet::floquet_reduce`] forms the periodic transformation
//!    `Q(t) = exp(tB) Φ(t)^{-1}` and fills every verification residual.
//!
//! Matrices are dense `ndarray::Array2<Complex64>`. A projective system of maps
//! on the `C^∞` tower is exactly a lower-triangular matrix whose leading
//! principal blocks are the individual levels, see [`tower::NestedMatrix`].
//!
//! The [`problem`] module holds the on-disk problem format, the pipeline driver
//! and report emission used by the `floquet` binary.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod floquet;
pub mod linalg;
pub mod ode;
pub mod problem;
pub mod tower;

pub use error::{Error, Result};
pub use floquet::{FloquetResult, MonodromyTower};
pub use linalg::LogBranch;
pub use ode::{CoefficientTower, SolutionTower, TrigPolynomial};
pub use tower::{InvertibleNestedMatrix, NestedMatrix, Seminorm, Tower};

pub use ndarray::Array2;
pub use num_complex::Complex64;

/// Moduli below this are treated as zero when a matrix has to be inverted.
pub const SINGULAR_THRESHOLD: f64 = 1e-12;

/// Default absolute tolerance for structurally zero entries.
pub const DEFAULT_PATTERN_TOL: f64 = 1e-12;
