use crate::error::KernelError;
use crate::kernel::{map_entries, require_finite, require_positive, Component, KernelKind, KernelSpec, Mat};

/// `C_ij(x, y) = exp(-t gamma_ij(x, y))`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchoenbergExp {
    pub gamma: KernelSpec,
    pub t: f64,
}

pub fn schoenberg_exp(gamma: &KernelSpec, t: f64) -> Result<KernelSpec, KernelError> {
    require_positive("schoenberg_exp", "t", t)?;
    Ok(KernelSpec::new(SchoenbergExp { gamma: gamma.clone(), t }))
}

impl Component for SchoenbergExp {
    fn op(&self) -> &'static str {
        "schoenberg_exp"
    }
    fn m(&self) -> usize {
        self.gamma.m()
    }
    fn dim(&self) -> usize {
        self.gamma.dim()
    }
    fn kind(&self) -> KernelKind {
        KernelKind::pd_if(self.gamma.kind().is_cnd())
    }
    fn stationary(&self) -> bool {
        self.gamma.is_stationary()
    }
    fn eval(&self, x: &[f64], y: &[f64]) -> Result<Mat, KernelError> {
        Ok(self.gamma.eval(x, y)?.map(|g| (-self.t * g).exp()))
    }
    fn children(&self) -> Vec<&KernelSpec> {
        vec![&self.gamma]
    }
}

fn require_stationary_pcv(op: &'static str, gamma: &KernelSpec) -> Result<(), KernelError> {
    if !gamma.is_stationary() {
        return Err(KernelError::param(op, format!("{} is not stationary", gamma.op())));
    }
    Ok(())
}

fn require_shift(op: &'static str, gamma: &KernelSpec, z: &[f64]) -> Result<(), KernelError> {
    if z.len() != gamma.dim() {
        return Err(KernelError::Dimension { expected: gamma.dim(), got: z.len() });
    }
    require_finite(op, "z", z)
}

fn shifted(x: &[f64], z: &[f64], sign: f64) -> Vec<f64> {
    x.iter().zip(z).map(|(a, b)| a + sign * b).collect()
}

/// Covariance of the increment field `Z(x + z) - Z(x)`:
/// `C(h) = gamma(h + z) + gamma(h - z) - 2 gamma(h)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IncrementCov {
    pub gamma: KernelSpec,
    pub z: Vec<f64>,
}

pub fn increment_cov(gamma: &KernelSpec, z: Vec<f64>) -> Result<KernelSpec, KernelError> {
    const OP: &str = "increment_cov";
    require_stationary_pcv(OP, gamma)?;
    require_shift(OP, gamma, &z)?;
    Ok(KernelSpec::new(IncrementCov { gamma: gamma.clone(), z }))
}

impl Component for IncrementCov {
    fn op(&self) -> &'static str {
        "increment_cov"
    }
    fn m(&self) -> usize {
        self.gamma.m()
    }
    fn dim(&self) -> usize {
        self.gamma.dim()
    }
    fn kind(&self) -> KernelKind {
        KernelKind::pd_if(self.gamma.kind().is_pcv())
    }
    fn stationary(&self) -> bool {
        true
    }
    fn eval(&self, x: &[f64], y: &[f64]) -> Result<Mat, KernelError> {
        let plus = self.gamma.eval(&shifted(x, &self.z, 1.0), y)?;
        let minus = self.gamma.eval(&shifted(x, &self.z, -1.0), y)?;
        let mid = self.gamma.eval(x, y)?;
        Ok(plus + minus - mid * 2.0)
    }
    fn children(&self) -> Vec<&KernelSpec> {
        vec![&self.gamma]
    }
}

/// `C_ij(h) = (1 + gamma_ij(h + z))(1 + gamma_ij(h - z)) / (1 + gamma_ij(h))^2 + c`.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioProduct {
    pub gamma: KernelSpec,
    pub z: Vec<f64>,
    pub c: f64,
}

pub fn ratio_product_model(gamma: &KernelSpec, z: Vec<f64>, c: f64) -> Result<KernelSpec, KernelError> {
    const OP: &str = "ratio_product_model";
    require_stationary_pcv(OP, gamma)?;
    require_shift(OP, gamma, &z)?;
    if !(c >= -1.0) || !c.is_finite() {
        return Err(KernelError::param(OP, format!("c must be finite and at least -1, got {c}")));
    }
    Ok(KernelSpec::new(RatioProduct { gamma: gamma.clone(), z, c }))
}

impl Component for RatioProduct {
    fn op(&self) -> &'static str {
        "ratio_product_model"
    }
    fn m(&self) -> usize {
        self.gamma.m()
    }
    fn dim(&self) -> usize {
        self.gamma.dim()
    }
    fn kind(&self) -> KernelKind {
        KernelKind::pd_if(self.gamma.kind().is_pcv())
    }
    fn stationary(&self) -> bool {
        true
    }
    fn eval(&self, x: &[f64], y: &[f64]) -> Result<Mat, KernelError> {
        let plus = self.gamma.eval(&shifted(x, &self.z, 1.0), y)?;
        let minus = self.gamma.eval(&shifted(x, &self.z, -1.0), y)?;
        let mid = self.gamma.eval(x, y)?;
        map_entries(&mid, |i, j, g| {
            if g <= -1.0 {
                return Err(KernelError::eval(self.op(), i, j, format!("1 + gamma = {} is not positive", 1.0 + g)));
            }
            Ok((1.0 + plus[(i, j)]) * (1.0 + minus[(i, j)]) / ((1.0 + g) * (1.0 + g)) + self.c)
        })
    }
    fn children(&self) -> Vec<&KernelSpec> {
        vec![&self.gamma]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::constant;
    use crate::pcv::{pcv_delay, pcv_power};

    #[test]
    fn zero_variogram_gives_ones() {
        let z = constant(2, 1, 0.0).unwrap();
        let c = schoenberg_exp(&z, 3.0).unwrap();
        assert!(c.kind().is_pd());
        assert!(c.evaluate(&[0.2], &[5.0]).unwrap().iter().all(|&v| v == 1.0));
        assert!(schoenberg_exp(&z, 0.0).is_err());
    }

    #[test]
    fn exponential_from_linear_variogram() {
        let g = pcv_power(1, 2, 1.0, 1.0, None).unwrap();
        let c = schoenberg_exp(&g, 1.0).unwrap();
        let v = c.evaluate(&[0.0, 0.0], &[0.6, 0.8]).unwrap()[(0, 0)];
        assert!((v - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn increment_of_quadratic_is_constant() {
        let g = pcv_power(2, 2, 2.0, 1.0, None).unwrap();
        let z = vec![0.3, -0.4];
        let c = increment_cov(&g, z).unwrap();
        for (x, y) in [([0.0, 0.0], [1.0, 2.0]), ([-3.0, 0.5], [0.1, 0.1])] {
            let v = c.evaluate(&x, &y).unwrap();
            assert!(v.iter().all(|&e| (e - 2.0 * 0.25).abs() < 1e-12));
        }
    }

    #[test]
    fn increment_triangle() {
        let g = pcv_power(1, 1, 1.0, 1.0, None).unwrap();
        let c = increment_cov(&g, vec![1.0]).unwrap();
        let at = |h: f64| c.evaluate(&[h], &[0.0]).unwrap()[(0, 0)];
        assert_eq!(at(0.0), 2.0);
        assert_eq!(at(1.0), 0.0);
        assert_eq!(at(0.5), 1.0);
        assert!(increment_cov(&g, vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn ratio_product_values() {
        let g = pcv_power(1, 1, 1.0, 1.0, None).unwrap();
        let c = ratio_product_model(&g, vec![1.0], 0.0).unwrap();
        assert_eq!(c.evaluate(&[0.0], &[0.0]).unwrap()[(0, 0)], 4.0);
        assert_eq!(c.evaluate(&[1.0], &[0.0]).unwrap()[(0, 0)], 0.75);
        assert!(ratio_product_model(&g, vec![1.0], -1.5).is_err());
        let zero = constant(2, 1, 0.0).unwrap();
        let c = ratio_product_model(&zero, vec![0.4], 0.5).unwrap();
        assert!(c.evaluate(&[0.3], &[2.0]).unwrap().iter().all(|&v| v == 1.5));
    }

    #[test]
    fn delay_model_is_asymmetric() {
        let g = pcv_power(1, 1, 1.0, 1.0, None).unwrap();
        let d = pcv_delay(&g, vec![vec![0.0], vec![0.5]]).unwrap();
        let c = schoenberg_exp(&d, 1.0).unwrap();
        let a = c.evaluate(&[0.3], &[0.0]).unwrap()[(0, 1)];
        let b = c.evaluate(&[-0.3], &[0.0]).unwrap()[(0, 1)];
        assert!((a - b).abs() > 1e-3);
    }
}
