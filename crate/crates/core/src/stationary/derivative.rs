//! Covariances obtained by differentiating smooth pseudo cross-variograms.

use serde::{Deserialize, Serialize};

use crate::error::KernelError;
use crate::kernel::{map_entries, require_positive, sq_dist, Component, Derivatives, KernelKind, KernelSpec, Mat};

/// Finite-difference estimates of the first two partials with error estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericPartials {
    pub first: Mat,
    pub second: Mat,
    pub first_err: f64,
    pub second_err: f64,
}

/// Central differences at steps `h` and `h/2` combined by one Richardson level,
/// with `h = eps^{1/6} (1 + |x_axis|)`. The fourth-order combination puts the
/// rounding floor near `eps^{2/3}`; a step of `eps^{1/3}` would leave it at
/// `eps^{1/3}` for the second partial.
pub fn numeric_partials(f: impl Fn(&[f64]) -> Result<Mat, KernelError>, x: &[f64], axis: usize) -> Result<NumericPartials, KernelError> {
    let base = f64::EPSILON.powf(1.0 / 6.0) * (1.0 + x[axis].abs());
    // Make the step exactly representable relative to x.
    let h = (x[axis] + base) - x[axis];
    let f0 = f(x)?;
    let mut p = x.to_vec();
    let mut at = |s: f64| -> Result<(Mat, Mat), KernelError> {
        p[axis] = x[axis] + s;
        let fp = f(&p)?;
        p[axis] = x[axis] - s;
        let fm = f(&p)?;
        Ok(((&fp - &fm) / (2.0 * s), (fp + fm - &f0 * 2.0) / (s * s)))
    };
    let (d1h, d2h) = at(h)?;
    let (d1q, d2q) = at(0.5 * h)?;
    let first = (&d1q * 4.0 - d1h) / 3.0;
    let second = (&d2q * 4.0 - d2h) / 3.0;
    Ok(NumericPartials { first_err: (&first - d1q).amax(), second_err: (&second - d2q).amax(), first, second })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeMode {
    Closed,
    Numeric,
}

fn partials(op: &'static str, gamma: &KernelSpec, mode: DerivativeMode, x: &[f64], y: &[f64], axis: usize) -> Result<Derivatives, KernelError> {
    match mode {
        DerivativeMode::Closed => {
            gamma.derivatives(x, y, axis).unwrap_or_else(|| Err(KernelError::param(op, format!("{} has no closed-form partials", gamma.op()))))
        }
        DerivativeMode::Numeric => {
            let n = numeric_partials(|p| gamma.eval(p, y), x, axis)?;
            Ok(Derivatives { value: gamma.eval(x, y)?, first: n.first, second: n.second })
        }
    }
}

fn require_axis(op: &'static str, gamma: &KernelSpec, axis: usize, mode: DerivativeMode) -> Result<(), KernelError> {
    if axis >= gamma.dim() {
        return Err(KernelError::param(op, format!("axis {axis} out of range for dimension {}", gamma.dim())));
    }
    if !gamma.is_stationary() {
        return Err(KernelError::param(op, format!("{} is not stationary", gamma.op())));
    }
    if mode == DerivativeMode::Closed && !gamma.has_derivatives(axis) {
        return Err(KernelError::param(op, format!("{} is not smooth along axis {axis}; closed-form mode unavailable", gamma.op())));
    }
    Ok(())
}

/// `C_ij(h) = d^2 gamma_ij(h) / dh_k^2` for a zero-based axis `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondDerivativeCov {
    pub gamma: KernelSpec,
    pub axis: usize,
    pub mode: DerivativeMode,
}

pub fn second_derivative_cov(gamma: &KernelSpec, axis: usize, mode: DerivativeMode) -> Result<KernelSpec, KernelError> {
    require_axis("second_derivative_cov", gamma, axis, mode)?;
    Ok(KernelSpec::new(SecondDerivativeCov { gamma: gamma.clone(), axis, mode }))
}

impl SecondDerivativeCov {
    /// Richardson error estimate of the numeric mode; zero in closed mode.
    pub fn error_estimate(&self, x: &[f64], y: &[f64]) -> Result<f64, KernelError> {
        match self.mode {
            DerivativeMode::Closed => Ok(0.0),
            DerivativeMode::Numeric => Ok(numeric_partials(|p| self.gamma.eval(p, y), x, self.axis)?.second_err),
        }
    }
}

impl Component for SecondDerivativeCov {
    fn op(&self) -> &'static str {
        "second_derivative_cov"
    }
    fn m(&self) -> usize {
        self.gamma.m()
    }
    fn dim(&self) -> usize {
        self.gamma.dim()
    }
    fn kind(&self) -> KernelKind {
        KernelKind::pd_if(self.gamma.kind().is_pcv() && self.gamma.has_derivatives(self.axis))
    }
    fn stationary(&self) -> bool {
        true
    }
    fn eval(&self, x: &[f64], y: &[f64]) -> Result<Mat, KernelError> {
        Ok(partials(self.op(), &self.gamma, self.mode, x, y, self.axis)?.second)
    }
    fn children(&self) -> Vec<&KernelSpec> {
        vec![&self.gamma]
    }
    fn caveats(&self) -> Vec<String> {
        if self.gamma.has_derivatives(self.axis) {
            Vec::new()
        } else {
            vec![format!("{} is not known to be twice differentiable; numeric second partials carry no claim", self.gamma.op())]
        }
    }
}

/// Completely monotone functions with closed-form first derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CmFunction {
    /// `e^{-t}`
    Exp,
    /// `(1 + t)^{-lambda}`
    InversePower { lambda: f64 },
}

impl CmFunction {
    /// `(L(t), L'(t))`.
    pub fn apply(self, t: f64) -> Result<(f64, f64), String> {
        match self {
            Self::Exp => {
                let e = (-t).exp();
                Ok((e, -e))
            }
            Self::InversePower { lambda } => {
                if !(t > -1.0) {
                    return Err(format!("argument {t} outside (-1, inf)"));
                }
                let v = (-lambda * t.ln_1p()).exp();
                Ok((v, -lambda * v / (1.0 + t)))
            }
        }
    }
}

/// `C_ij(h, u) = L(gamma_ij) d_u^2 gamma_ij + L'(gamma_ij) (d_u gamma_ij)^2`,
/// with `u` the last coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct CmDerivativeCov {
    pub gamma: KernelSpec,
    pub function: CmFunction,
    pub mode: DerivativeMode,
}

pub fn cm_derivative_cov(gamma: &KernelSpec, function: CmFunction, mode: DerivativeMode) -> Result<KernelSpec, KernelError> {
    const OP: &str = "cm_derivative_cov";
    if let CmFunction::InversePower { lambda } = function {
        require_positive(OP, "lambda", lambda)?;
    }
    require_axis(OP, gamma, gamma.dim() - 1, mode)?;
    Ok(KernelSpec::new(CmDerivativeCov { gamma: gamma.clone(), function, mode }))
}

impl Component for CmDerivativeCov {
    fn op(&self) -> &'static str {
        "cm_derivative_cov"
    }
    fn m(&self) -> usize {
        self.gamma.m()
    }
    fn dim(&self) -> usize {
        self.gamma.dim()
    }
    fn kind(&self) -> KernelKind {
        KernelKind::pd_if(self.gamma.kind().is_pcv() && self.gamma.has_derivatives(self.gamma.dim() - 1))
    }
    fn stationary(&self) -> bool {
        true
    }
    fn eval(&self, x: &[f64], y: &[f64]) -> Result<Mat, KernelError> {
        let d = partials(self.op(), &self.gamma, self.mode, x, y, self.gamma.dim() - 1)?;
        map_entries(&d.value, |i, j, g| {
            let (l, l1) = self.function.apply(g).map_err(|e| KernelError::eval(self.op(), i, j, e))?;
            let g1 = d.first[(i, j)];
            Ok(l * d.second[(i, j)] + l1 * g1 * g1)
        })
    }
    fn children(&self) -> Vec<&KernelSpec> {
        vec![&self.gamma]
    }
}

/// `C_ij(h) = g'_ij(|h|^2)` on `R^d` from an isotropic pseudo cross-variogram
/// `g_ij(|h|^2)` valid on `R^{d+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsotropicDescent {
    pub gamma: KernelSpec,
}

pub fn isotropic_descent(gamma: &KernelSpec) -> Result<KernelSpec, KernelError> {
    const OP: &str = "isotropic_descent";
    if !gamma.has_radial() {
        return Err(KernelError::param(OP, format!("{} has no whitelisted closed-form radial profile", gamma.op())));
    }
    if gamma.dim() < 2 {
        return Err(KernelError::param(OP, "profile must be declared valid in dimension d + 1 >= 2"));
    }
    Ok(KernelSpec::new(IsotropicDescent { gamma: gamma.clone() }))
}

impl Component for IsotropicDescent {
    fn op(&self) -> &'static str {
        "isotropic_descent"
    }
    fn m(&self) -> usize {
        self.gamma.m()
    }
    fn dim(&self) -> usize {
        self.gamma.dim() - 1
    }
    fn kind(&self) -> KernelKind {
        KernelKind::pd_if(self.gamma.kind().is_pcv())
    }
    fn stationary(&self) -> bool {
        true
    }
    fn eval(&self, x: &[f64], y: &[f64]) -> Result<Mat, KernelError> {
        let t = sq_dist(x, y);
        let r = self.gamma.radial(t).unwrap_or_else(|| Err(KernelError::param(self.op(), "radial profile unavailable")))?;
        Ok(r.slope)
    }
    fn children(&self) -> Vec<&KernelSpec> {
        vec![&self.gamma]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::constant;
    use crate::pcv::{pcv_nested_spacetime, pcv_power, pcv_shape, VariogramShape};

    #[test]
    fn quadratic_gives_constant_two() {
        let g = pcv_power(1, 1, 2.0, 1.0, None).unwrap();
        for mode in [DerivativeMode::Closed, DerivativeMode::Numeric] {
            let c = second_derivative_cov(&g, 0, mode).unwrap();
            for h in [0.0, 0.7, -3.0] {
                assert!((c.evaluate(&[h], &[0.0]).unwrap()[(0, 0)] - 2.0).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn gaussian_variogram_second_partial() {
        let g = pcv_shape(1, 1, VariogramShape::Gaussian, 1.0, None).unwrap();
        let closed = second_derivative_cov(&g, 0, DerivativeMode::Closed).unwrap();
        let numeric = second_derivative_cov(&g, 0, DerivativeMode::Numeric).unwrap();
        for h in [0.0f64, 0.3, 1.1, -2.0] {
            let want = (2.0 - 4.0 * h * h) * (-h * h).exp();
            let a = closed.evaluate(&[h], &[0.0]).unwrap()[(0, 0)];
            let b = numeric.evaluate(&[h], &[0.0]).unwrap()[(0, 0)];
            assert!((a - want).abs() < 1e-14);
            assert!((b - want).abs() < 1e-8, "h={h}: {b} vs {want}");
        }
        let Node::SecondDerivative(s) = numeric.node() else { unreachable!() };
        assert!(s.error_estimate(&[0.4], &[0.0]).unwrap() < 1e-6);
    }

    use crate::kernel::Node;

    #[test]
    fn non_smooth_rejected_in_closed_mode() {
        let g = pcv_power(1, 1, 1.0, 1.0, None).unwrap();
        assert!(second_derivative_cov(&g, 0, DerivativeMode::Closed).is_err());
        let c = second_derivative_cov(&g, 0, DerivativeMode::Numeric).unwrap();
        assert!(c.kind().is_unvalidated());
        assert!(second_derivative_cov(&g, 1, DerivativeMode::Numeric).is_err());
    }

    #[test]
    fn cm_of_temporal_quadratic() {
        let gt = pcv_power(2, 1, 2.0, 1.0, None).unwrap();
        let gs = constant(2, 2, 0.0).unwrap();
        let g = pcv_nested_spacetime(&gs, &gt).unwrap();
        for mode in [DerivativeMode::Closed, DerivativeMode::Numeric] {
            let c = cm_derivative_cov(&g, CmFunction::Exp, mode).unwrap();
            assert!(c.kind().is_pd());
            for u in [0.0f64, 0.5, 1.3] {
                let want = (2.0 - 4.0 * u * u) * (-u * u).exp();
                let v = c.evaluate(&[0.1, 0.2, u], &[1.0, -1.0, 0.0]).unwrap();
                assert!(v.iter().all(|e| (e - want).abs() < 1e-8), "u={u}");
            }
        }
    }

    #[test]
    fn descent_profiles() {
        let g = pcv_power(1, 3, 2.0, 1.0, None).unwrap();
        let c = isotropic_descent(&g).unwrap();
        assert_eq!(c.dim(), 2);
        assert!((c.evaluate(&[0.0, 0.0], &[3.0, 1.0]).unwrap()[(0, 0)] - 1.0).abs() < 1e-15);

        let g = pcv_shape(1, 3, VariogramShape::Gaussian, 1.0, None).unwrap();
        let c = isotropic_descent(&g).unwrap();
        let v = c.evaluate(&[0.0, 0.0], &[0.6, 0.8]).unwrap()[(0, 0)];
        assert!((v - (-1.0f64).exp()).abs() < 1e-15);

        let g = pcv_shape(1, 3, VariogramShape::Cauchy { beta: 0.5 }, 1.0, None).unwrap();
        let c = isotropic_descent(&g).unwrap();
        let v = c.evaluate(&[0.0, 0.0], &[1.0, 1.0]).unwrap()[(0, 0)];
        assert!((v - 0.5 / 3f64.sqrt()).abs() < 1e-15);

        assert!(isotropic_descent(&pcv_power(1, 3, 1.0, 1.0, None).unwrap()).is_err());
    }
}
