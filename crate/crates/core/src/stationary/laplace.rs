//! One-dimensional Laplace transforms of non-negative random variables and
//! finite matrix-weighted mixtures.

use serde::{Deserialize, Serialize};

use crate::error::KernelError;
use crate::kernel::leaves::require_psd;
use crate::kernel::{require_positive, Mat};
use crate::linalg::SymMatrix;
use crate::special::{bessel_k_ln, SpecialError};

/// `L(s) = E[exp(-s X)]` for a whitelisted law of `X >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum LaplaceTransform {
    /// `X = at`, `L(s) = e^{-at s}`; `at = 0` gives `L = 1`.
    PointMass {
        at: f64,
    },
    /// Shape-rate Gamma: `(1 + s / rate)^{-shape}`.
    Gamma {
        shape: f64,
        rate: f64,
    },
    Exponential {
        rate: f64,
    },
    /// Density proportional to `x^{lambda-1} exp(-(chi / x + psi x) / 2)`.
    Gig {
        lambda: f64,
        chi: f64,
        psi: f64,
    },
}

/// Failure to evaluate a transform at a given argument.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TransformError {
    #[error("argument {0} is outside the transform's domain")]
    Domain(f64),
    #[error(transparent)]
    Special(#[from] SpecialError),
}

impl LaplaceTransform {
    pub fn validate(&self, op: &'static str) -> Result<(), KernelError> {
        match *self {
            Self::PointMass { at } => {
                if !(at >= 0.0) || !at.is_finite() {
                    return Err(KernelError::param(op, format!("point mass location must be finite and non-negative, got {at}")));
                }
                Ok(())
            }
            Self::Gamma { shape, rate } => {
                require_positive(op, "shape", shape)?;
                require_positive(op, "rate", rate)
            }
            Self::Exponential { rate } => require_positive(op, "rate", rate),
            Self::Gig { lambda, chi, psi } => {
                if !lambda.is_finite() {
                    return Err(KernelError::param(op, "lambda must be finite"));
                }
                require_positive(op, "chi", chi)?;
                require_positive(op, "psi", psi)
            }
        }
    }

    /// Smallest admissible argument (exclusive for the rational families).
    fn lower_bound(&self) -> f64 {
        match *self {
            Self::PointMass { .. } => f64::NEG_INFINITY,
            Self::Gamma { rate, .. } | Self::Exponential { rate } => -rate,
            Self::Gig { psi, .. } => -0.5 * psi,
        }
    }

    pub fn value(&self, s: f64) -> Result<f64, TransformError> {
        if !(s > self.lower_bound()) {
            return Err(TransformError::Domain(s));
        }
        Ok(match *self {
            Self::PointMass { at } => (-at * s).exp(),
            Self::Gamma { shape, rate } => (-shape * (s / rate).ln_1p()).exp(),
            Self::Exponential { rate } => rate / (rate + s),
            Self::Gig { lambda, chi, psi } => {
                let nu = lambda.abs();
                let t = psi + 2.0 * s;
                let log = 0.5 * lambda * (psi.ln() - t.ln()) + bessel_k_ln(nu, (chi * t).sqrt())? - bessel_k_ln(nu, (chi * psi).sqrt())?;
                log.exp()
            }
        })
    }
}

/// Matrix weight at one node of a one-dimensional mixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureNode1d {
    pub omega: f64,
    pub weight: SymMatrix,
}

/// `L_ij(s) = int e^{-omega s} dmu_ij(omega)` for a PSD matrix measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Mixture1d {
    /// Finite sum of PSD matrix weights at non-negative nodes.
    Nodes { nodes: Vec<MixtureNode1d> },
    /// A common probability law for every entry.
    Transform { transform: LaplaceTransform },
}

impl Mixture1d {
    pub(crate) fn validate(&self, op: &'static str, m: usize) -> Result<(), KernelError> {
        match self {
            Self::Nodes { nodes } => {
                if nodes.is_empty() {
                    return Err(KernelError::param(op, "mixture needs at least one node"));
                }
                for (k, n) in nodes.iter().enumerate() {
                    if !(n.omega >= 0.0) || !n.omega.is_finite() {
                        return Err(KernelError::param(op, format!("node {k}: omega must be finite and non-negative")));
                    }
                    if n.weight.order() != m {
                        return Err(KernelError::shape(op, format!("node {k}: weight has order {}, expected {m}", n.weight.order())));
                    }
                    require_psd(op, &format!("weight at node {k} (omega = {})", n.omega), &n.weight)?;
                }
                Ok(())
            }
            Self::Transform { transform } => transform.validate(op),
        }
    }

    /// Entry `(i, j)` at argument `s`.
    pub(crate) fn entry(&self, i: usize, j: usize, s: f64) -> Result<f64, TransformError> {
        match self {
            Self::Nodes { nodes } => Ok(nodes.iter().map(|n| n.weight.get(i, j) * (-n.omega * s).exp()).sum()),
            Self::Transform { transform } => transform.value(s),
        }
    }

    /// `L_ij(0)`.
    pub fn total_mass(&self, m: usize) -> Mat {
        match self {
            Self::Nodes { nodes } => nodes.iter().fold(Mat::zeros(m, m), |acc, n| acc + n.weight.as_matrix()),
            Self::Transform { .. } => Mat::from_element(m, m, 1.0),
        }
    }
}
