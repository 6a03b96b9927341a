//! Gaussian-process collocation for nonlinear PDEs and PDE-constrained
//! inverse problems.
//!
//! The unknown function is recovered as the minimum-norm element of a
//! Gaussian RKHS that satisfies the PDE at collocation points. The
//! finite-dimensional problem is solved with a Gauss-Newton iteration
//! weighted by the inverse kernel matrix.

pub mod error;
pub mod experiment;
pub mod functionals;
pub mod gram;
pub mod kernels;
pub mod parallel;
pub mod problems;
pub mod reference;
pub mod solver;
pub mod validate;

pub use error::{Error, Result};
pub use functionals::{grid_collocation, sample_collocation, BoxDomain, CollocationSet, FunctionalVector};
pub use gram::{GramSystem, NuggetKind};
pub use kernels::{DerivativeOp, KernelFamily, KernelSpec};
pub use parallel::Parallelism;
