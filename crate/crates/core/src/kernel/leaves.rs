use serde::{Deserialize, Serialize};

use super::{diff, sq_norm, Component, Derivatives, KernelKind, KernelSpec, Mat, RadialProfile};
use crate::error::KernelError;
use crate::linalg::{min_eigenvalue, SymMatrix};
use crate::special;

/// `c * 1 1^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantKernel {
    pub m: usize,
    pub dim: usize,
    pub value: f64,
}

pub fn constant(m: usize, dim: usize, value: f64) -> Result<KernelSpec, KernelError> {
    check_shape("constant", m, dim)?;
    if !value.is_finite() {
        return Err(KernelError::param("constant", "value must be finite"));
    }
    Ok(KernelSpec::new(ConstantKernel { m, dim, value }))
}

pub(crate) fn check_shape(op: &'static str, m: usize, dim: usize) -> Result<(), KernelError> {
    if m == 0 || dim == 0 {
        return Err(KernelError::param(op, "m and dim must be positive"));
    }
    Ok(())
}

impl Component for ConstantKernel {
    fn op(&self) -> &'static str {
        "constant"
    }
    fn m(&self) -> usize {
        self.m
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn kind(&self) -> KernelKind {
        KernelKind {
            positive_definite: self.value >= 0.0,
            conditionally_negative_definite: true,
            pseudo_variogram: self.value == 0.0,
            cross_variogram: self.value == 0.0,
        }
    }
    fn stationary(&self) -> bool {
        true
    }
    fn eval(&self, _x: &[f64], _y: &[f64]) -> Result<Mat, KernelError> {
        Ok(Mat::from_element(self.m, self.m, self.value))
    }
    fn derivatives(&self, x: &[f64], y: &[f64], _axis: usize) -> Option<Result<Derivatives, KernelError>> {
        Some(self.eval(x, y).map(Derivatives::constant))
    }
    fn has_derivatives(&self, _axis: usize) -> bool {
        true
    }
    fn radial(&self, _t: f64) -> Option<Result<RadialProfile, KernelError>> {
        Some(Ok(RadialProfile { value: Mat::from_element(self.m, self.m, self.value), slope: Mat::zeros(self.m, self.m) }))
    }
    fn has_radial(&self) -> bool {
        true
    }
}

/// Isotropic correlation profile of a covariance leaf.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum CovShape {
    /// `e^{-r}`
    Exponential,
    /// `e^{-r^2}`
    Gaussian,
    /// `M_nu(r)`, normalized to one at the origin.
    Matern { nu: f64 },
}

/// `C_ij(x, y) = B_ij rho(|x - y| / scale)` with a PSD sill `B`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceKernel {
    pub dim: usize,
    pub shape: CovShape,
    pub scale: f64,
    pub sill: SymMatrix,
}

/// Covariance leaf; `sill` defaults to the identity.
pub fn covariance(m: usize, dim: usize, shape: CovShape, scale: f64, sill: Option<SymMatrix>) -> Result<KernelSpec, KernelError> {
    const OP: &str = "covariance";
    check_shape(OP, m, dim)?;
    super::require_positive(OP, "scale", scale)?;
    if let CovShape::Matern { nu } = shape {
        super::require_positive(OP, "nu", nu)?;
    }
    let sill = match sill {
        Some(s) => s,
        None => SymMatrix::identity(m).map_err(|e| KernelError::param(OP, e.to_string()))?,
    };
    if sill.order() != m {
        return Err(KernelError::shape(OP, format!("sill has order {}, expected {m}", sill.order())));
    }
    require_psd(OP, "sill", &sill)?;
    Ok(KernelSpec::new(CovarianceKernel { dim, shape, scale, sill }))
}

pub(crate) fn require_psd(op: &'static str, name: &str, s: &SymMatrix) -> Result<(), KernelError> {
    let r = min_eigenvalue(s).map_err(|e| KernelError::param(op, format!("{name}: {e}")))?;
    if r.min_eigenvalue < -1e-12 * r.max_abs_eigenvalue.max(f64::MIN_POSITIVE) {
        return Err(KernelError::param(op, format!("{name} is not positive semidefinite (min eigenvalue {:.3e})", r.min_eigenvalue)));
    }
    Ok(())
}

impl CovarianceKernel {
    fn profile(&self, r: f64) -> Result<f64, KernelError> {
        match self.shape {
            CovShape::Exponential => Ok((-r).exp()),
            CovShape::Gaussian => Ok((-r * r).exp()),
            CovShape::Matern { nu } => special::matern_profile(nu, r).map_err(KernelError::special("covariance", 0, 0)),
        }
    }
}

impl Component for CovarianceKernel {
    fn op(&self) -> &'static str {
        "covariance"
    }
    fn m(&self) -> usize {
        self.sill.order()
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn kind(&self) -> KernelKind {
        KernelKind::PD
    }
    fn stationary(&self) -> bool {
        true
    }
    fn eval(&self, x: &[f64], y: &[f64]) -> Result<Mat, KernelError> {
        let r = sq_norm(&diff(x, y)).sqrt() / self.scale;
        Ok(self.sill.as_matrix() * self.profile(r)?)
    }
    fn derivatives(&self, x: &[f64], y: &[f64], axis: usize) -> Option<Result<Derivatives, KernelError>> {
        if self.shape != CovShape::Gaussian {
            return None;
        }
        let h = diff(x, y);
        let s2 = self.scale * self.scale;
        let e = (-sq_norm(&h) / s2).exp();
        let hk = h[axis];
        let b = self.sill.as_matrix();
        Some(Ok(Derivatives { value: b * e, first: b * (e * (-2.0 * hk / s2)), second: b * (e * (4.0 * hk * hk / (s2 * s2) - 2.0 / s2)) }))
    }
    fn has_derivatives(&self, _axis: usize) -> bool {
        self.shape == CovShape::Gaussian
    }
    fn radial(&self, t: f64) -> Option<Result<RadialProfile, KernelError>> {
        if self.shape != CovShape::Gaussian {
            return None;
        }
        let s2 = self.scale * self.scale;
        let e = (-t / s2).exp();
        let b = self.sill.as_matrix();
        Some(Ok(RadialProfile { value: b * e, slope: b * (-e / s2) }))
    }
    fn has_radial(&self) -> bool {
        self.shape == CovShape::Gaussian
    }
}
