//! Gaussian-shaped space-time kernels whose anisotropy matrix moves with a
//! temporal pseudo cross-variogram.

use nalgebra::DVector;

use super::laplace::{Mixture1d, TransformError};
use crate::error::KernelError;
use crate::kernel::leaves::require_psd;
use crate::kernel::{diff, require_finite, Component, KernelKind, KernelSpec, Mat};
use crate::linalg::SymMatrix;

/// `A_ij(u) = sigma + sum_l gamma^l_ij(u) sigma_l`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianExtendedParams {
    pub m: usize,
    /// Positive definite, order `d`.
    pub sigma: SymMatrix,
    /// `(sigma_l, gamma^l)` with `sigma_l` PSD of order `d` and `gamma^l` on `R^k`.
    pub terms: Vec<(SymMatrix, KernelSpec)>,
    pub dim_time: usize,
}

impl GaussianExtendedParams {
    fn validate(&self, op: &'static str) -> Result<(), KernelError> {
        let d = self.sigma.order();
        if self.m == 0 || self.dim_time == 0 {
            return Err(KernelError::param(op, "m and dim_time must be positive"));
        }
        if self.sigma.as_matrix().clone().cholesky().is_none() {
            return Err(KernelError::param(op, "sigma is not positive definite"));
        }
        for (l, (s, g)) in self.terms.iter().enumerate() {
            if s.order() != d {
                return Err(KernelError::shape(op, format!("sigma_{l} has order {}, expected {d}", s.order())));
            }
            require_psd(op, &format!("sigma_{l}"), s)?;
            if g.m() != self.m || g.dim() != self.dim_time {
                return Err(KernelError::shape(
                    op,
                    format!("gamma_{l} has (m, dim) = ({}, {}), expected ({}, {})", g.m(), g.dim(), self.m, self.dim_time),
                ));
            }
        }
        Ok(())
    }

    fn dim_space(&self) -> usize {
        self.sigma.order()
    }

    fn pcv_terms(&self) -> bool {
        self.terms.iter().all(|(_, g)| g.kind().is_pcv())
    }

    fn stationary(&self) -> bool {
        self.terms.iter().all(|(_, g)| g.is_stationary())
    }

    /// Temporal variogram values, one matrix per term.
    fn gammas(&self, x: &[f64], y: &[f64]) -> Result<Vec<Mat>, KernelError> {
        let d = self.dim_space();
        self.terms.iter().map(|(_, g)| g.eval(&x[d..], &y[d..])).collect()
    }

    /// `(log |A_ij|, q^T A_ij^{-1} q)` by Cholesky.
    fn quadratic(&self, op: &'static str, gammas: &[Mat], i: usize, j: usize, q: &[f64], u: &[f64]) -> Result<(f64, f64), KernelError> {
        let mut a = self.sigma.as_matrix().clone();
        for ((s, _), g) in self.terms.iter().zip(gammas) {
            a += s.as_matrix() * g[(i, j)];
        }
        let chol = a.cholesky().ok_or_else(|| KernelError::eval(op, i, j, format!("A_ij(u) is not positive definite at u = {u:?}")))?;
        let logdet = 2.0 * chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>();
        let qv = DVector::from_column_slice(q);
        let sol = chol.solve(&qv);
        Ok((logdet, qv.dot(&sol)))
    }
}

/// `C_ij(h, u) = |A_ij(u)|^{-1/2} exp(-h^T A_ij(u)^{-1} h / 2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianExtended {
    pub params: GaussianExtendedParams,
}

pub fn gaussian_extended(params: GaussianExtendedParams) -> Result<KernelSpec, KernelError> {
    params.validate("gaussian_extended")?;
    Ok(KernelSpec::new(GaussianExtended { params }))
}

impl Component for GaussianExtended {
    fn op(&self) -> &'static str {
        "gaussian_extended"
    }
    fn m(&self) -> usize {
        self.params.m
    }
    fn dim(&self) -> usize {
        self.params.dim_space() + self.params.dim_time
    }
    fn kind(&self) -> KernelKind {
        KernelKind::pd_if(self.params.pcv_terms())
    }
    fn stationary(&self) -> bool {
        self.params.stationary()
    }
    fn eval(&self, x: &[f64], y: &[f64]) -> Result<Mat, KernelError> {
        let d = self.params.dim_space();
        let h = diff(&x[..d], &y[..d]);
        let u = diff(&x[d..], &y[d..]);
        let gammas = self.params.gammas(x, y)?;
        let m = self.params.m;
        let mut out = Mat::zeros(m, m);
        for j in 0..m {
            for i in 0..m {
                let (logdet, qf) = self.params.quadratic(self.op(), &gammas, i, j, &h, &u)?;
                out[(i, j)] = (-0.5 * logdet - 0.5 * qf).exp();
            }
        }
        Ok(out)
    }
    fn children(&self) -> Vec<&KernelSpec> {
        self.params.terms.iter().map(|(_, g)| g).collect()
    }
}

/// `C_ij(h, u) = |A_ij(u)|^{-1/2} L_ij((h + theta u)^T A_ij(u)^{-1} (h + theta u) / 2)`
/// on `R^d x R`.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianMixture {
    pub params: GaussianExtendedParams,
    pub theta: Vec<f64>,
    pub mixture: Mixture1d,
}

pub fn lagrangian_mixture(params: GaussianExtendedParams, theta: Vec<f64>, mixture: Mixture1d) -> Result<KernelSpec, KernelError> {
    const OP: &str = "lagrangian_mixture";
    params.validate(OP)?;
    if params.dim_time != 1 {
        return Err(KernelError::shape(OP, format!("requires a scalar time, got dim_time = {}", params.dim_time)));
    }
    if theta.len() != params.dim_space() {
        return Err(KernelError::shape(OP, format!("theta has length {}, expected {}", theta.len(), params.dim_space())));
    }
    require_finite(OP, "theta", &theta)?;
    mixture.validate(OP, params.m)?;
    Ok(KernelSpec::new(LagrangianMixture { params, theta, mixture }))
}

impl Component for LagrangianMixture {
    fn op(&self) -> &'static str {
        "lagrangian_mixture"
    }
    fn m(&self) -> usize {
        self.params.m
    }
    fn dim(&self) -> usize {
        self.params.dim_space() + 1
    }
    fn kind(&self) -> KernelKind {
        KernelKind::pd_if(self.params.pcv_terms())
    }
    fn stationary(&self) -> bool {
        self.params.stationary()
    }
    fn eval(&self, x: &[f64], y: &[f64]) -> Result<Mat, KernelError> {
        let d = self.params.dim_space();
        let u = x[d] - y[d];
        let q: Vec<f64> = diff(&x[..d], &y[..d]).iter().zip(&self.theta).map(|(h, t)| h + t * u).collect();
        let gammas = self.params.gammas(x, y)?;
        let m = self.params.m;
        let mut out = Mat::zeros(m, m);
        for j in 0..m {
            for i in 0..m {
                let (logdet, qf) = self.params.quadratic(self.op(), &gammas, i, j, &q, &[u])?;
                let l = self.mixture.entry(i, j, 0.5 * qf).map_err(|e| match e {
                    TransformError::Special(s) => KernelError::Special { op: self.op(), i, j, source: s },
                    other => KernelError::eval(self.op(), i, j, other.to_string()),
                })?;
                out[(i, j)] = (-0.5 * logdet).exp() * l;
            }
        }
        Ok(out)
    }
    fn children(&self) -> Vec<&KernelSpec> {
        self.params.terms.iter().map(|(_, g)| g).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pcv::pcv_power;
    use crate::stationary::laplace::MixtureNode1d;

    fn params(theta_dim: usize) -> GaussianExtendedParams {
        let g = pcv_power(2, 1, 1.0, 1.0, None).unwrap();
        let s1 = SymMatrix::from_rows(&[vec![0.5, 0.1], vec![0.1, 0.3]]).unwrap();
        GaussianExtendedParams { m: 2, sigma: SymMatrix::identity(theta_dim).unwrap(), terms: vec![(s1, g)], dim_time: 1 }
    }

    #[test]
    fn identity_origin_is_one() {
        let c = gaussian_extended(params(2)).unwrap();
        let v = c.evaluate(&[0.3, 0.3, 1.0], &[0.3, 0.3, 1.0]).unwrap();
        assert!((v[(0, 0)] - 1.0).abs() < 1e-15 && (v[(1, 1)] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn no_terms_is_gaussian() {
        let sigma = SymMatrix::from_rows(&[vec![2.0, 0.3], vec![0.3, 1.0]]).unwrap();
        let p = GaussianExtendedParams { m: 1, sigma: sigma.clone(), terms: vec![], dim_time: 1 };
        let c = gaussian_extended(p).unwrap();
        let h = DVector::from_vec(vec![0.5, -0.7]);
        let inv = sigma.as_matrix().clone().try_inverse().unwrap();
        let want = sigma.as_matrix().determinant().powf(-0.5) * (-0.5 * h.dot(&(inv * &h))).exp();
        let got = c.evaluate(&[0.5, -0.7, 3.0], &[0.0, 0.0, 1.0]).unwrap()[(0, 0)];
        assert!((got - want).abs() < 1e-15);
    }

    #[test]
    fn single_node_lagrangian_is_gaussian_extended() {
        let ones = SymMatrix::from_fn(2, |_, _| 1.0).unwrap();
        let mix = Mixture1d::Nodes { nodes: vec![MixtureNode1d { omega: 1.0, weight: ones }] };
        let l = lagrangian_mixture(params(2), vec![0.0, 0.0], mix).unwrap();
        let g = gaussian_extended(params(2)).unwrap();
        let (x, y) = ([0.2, -1.0, 0.5], [1.0, 0.4, -0.7]);
        assert!((l.evaluate(&x, &y).unwrap() - g.evaluate(&x, &y).unwrap()).amax() < 1e-15);
    }

    #[test]
    fn drift_cancels_at_h_equal_minus_theta_u() {
        let theta = vec![0.8, -0.4];
        let mix = Mixture1d::Transform { transform: crate::stationary::LaplaceTransform::Gamma { shape: 2.0, rate: 1.0 } };
        let l = lagrangian_mixture(params(2), theta.clone(), mix).unwrap();
        let u = 1.5;
        let x = [-theta[0] * u, -theta[1] * u, u];
        let v = l.evaluate(&x, &[0.0, 0.0, 0.0]).unwrap();
        let g = gaussian_extended(params(2)).unwrap().evaluate(&[0.0, 0.0, u], &[0.0, 0.0, 0.0]).unwrap();
        assert!((v - g).amax() < 1e-15);
        let a = l.evaluate(&[0.5, 0.2, 1.0], &[0.0, 0.0, 0.0]).unwrap()[(0, 1)];
        let b = l.evaluate(&[-0.5, -0.2, 1.0], &[0.0, 0.0, 0.0]).unwrap()[(0, 1)];
        assert!((a - b).abs() > 1e-3);
    }

    #[test]
    fn rejects_bad_inputs() {
        let mut p = params(2);
        p.sigma = SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(gaussian_extended(p).is_err());
        let mix = Mixture1d::Transform { transform: crate::stationary::LaplaceTransform::Exponential { rate: 1.0 } };
        assert!(lagrangian_mixture(params(2), vec![1.0], mix).is_err());
    }
}
