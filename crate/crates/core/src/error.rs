use thiserror::Error;

use crate::special::SpecialError;

/// Construction or evaluation failure of a kernel expression.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    /// Parameter outside the family's admissible range.
    #[error("{op}: {msg}")]
    Param { op: &'static str, msg: String },
    /// Children or parameters with incompatible `m` or dimensions.
    #[error("{op}: shape mismatch: {msg}")]
    Shape { op: &'static str, msg: String },
    #[error("point has {got} coordinates, kernel expects {expected}")]
    Dimension { expected: usize, got: usize },
    /// Numerical failure at a specific matrix entry.
    #[error("{op}: evaluation failed at entry ({i}, {j}): {msg}")]
    Eval { op: &'static str, i: usize, j: usize, msg: String },
    #[error("{op}: {source} at entry ({i}, {j})")]
    Special {
        op: &'static str,
        i: usize,
        j: usize,
        #[source]
        source: SpecialError,
    },
}

impl KernelError {
    pub(crate) fn param(op: &'static str, msg: impl Into<String>) -> Self {
        Self::Param { op, msg: msg.into() }
    }

    pub(crate) fn shape(op: &'static str, msg: impl Into<String>) -> Self {
        Self::Shape { op, msg: msg.into() }
    }

    pub(crate) fn eval(op: &'static str, i: usize, j: usize, msg: impl Into<String>) -> Self {
        Self::Eval { op, i, j, msg: msg.into() }
    }

    pub(crate) fn special(op: &'static str, i: usize, j: usize) -> impl FnOnce(SpecialError) -> Self {
        move |source| Self::Special { op, i, j, source }
    }
}
