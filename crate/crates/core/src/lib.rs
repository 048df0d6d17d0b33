//! Construction and numerical certification of matrix-valued covariance
//! kernels for multivariate random fields.
//!
//! Kernels are immutable [`KernelSpec`] trees. Pseudo cross-variograms live in
//! [`pcv`]; [`stationary`] and [`nonstationary`] turn them into positive
//! definite kernels; [`validation`] checks definiteness claims on finite point
//! sets; [`simulation`] draws Gaussian fields.

// `!(x > 0.0)` is used on purpose: NaN must fail every parameter check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod kernel;
pub mod linalg;
pub mod nonstationary;
pub mod pcv;
pub mod quadrature;
pub mod simulation;
pub mod special;
pub mod stationary;
pub mod validation;

pub use error::KernelError;
pub use kernel::{assemble_gram, BlockMatrix, KernelKind, KernelSpec, Mat, MatrixKernel, PointSet};
pub use linalg::SymMatrix;
