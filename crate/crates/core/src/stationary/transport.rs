use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::laplace::{LaplaceTransform, TransformError};
use crate::error::KernelError;
use crate::kernel::{require_finite, Component, KernelKind, KernelSpec, Mat};

/// `L(x, y) = L0(x + y) L1(x) L2(y)`, the joint transform of
/// `(X0 + X1, X0 + X2)` for independent non-negative `X0, X1, X2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Laplace2dTransform {
    pub common: LaplaceTransform,
    pub first: LaplaceTransform,
    pub second: LaplaceTransform,
}

impl Laplace2dTransform {
    /// `L1(x) L2(y)`.
    pub fn product(first: LaplaceTransform, second: LaplaceTransform) -> Self {
        Self { common: LaplaceTransform::PointMass { at: 0.0 }, first, second }
    }

    fn validate(&self, op: &'static str) -> Result<(), KernelError> {
        self.common.validate(op)?;
        self.first.validate(op)?;
        self.second.validate(op)
    }

    pub fn value(&self, x: f64, y: f64) -> Result<f64, TransformError> {
        Ok(self.common.value(x + y)? * self.first.value(x)? * self.second.value(y)?)
    }
}

/// Law of the velocity `(V1, V2)` in `R^{d1 + d2}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case", deny_unknown_fields)]
pub enum VelocityLaw {
    Constant {
        v: Vec<f64>,
    },
    /// Independent normal coordinates.
    Normal {
        mean: Vec<f64>,
        sd: Vec<f64>,
    },
}

impl VelocityLaw {
    fn len(&self) -> usize {
        match self {
            Self::Constant { v } => v.len(),
            Self::Normal { mean, .. } => mean.len(),
        }
    }

    fn validate(&self, op: &'static str) -> Result<(), KernelError> {
        match self {
            Self::Constant { v } => require_finite(op, "v", v),
            Self::Normal { mean, sd } => {
                require_finite(op, "mean", mean)?;
                require_finite(op, "sd", sd)?;
                if sd.len() != mean.len() {
                    return Err(KernelError::shape(op, format!("sd has length {}, mean {}", sd.len(), mean.len())));
                }
                if sd.iter().any(|s| *s < 0.0) {
                    return Err(KernelError::param(op, "sd must be non-negative"));
                }
                Ok(())
            }
        }
    }

    fn draw(&self, n: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| match self {
                Self::Constant { v } => v.clone(),
                Self::Normal { mean, sd } => mean.iter().zip(sd).map(|(m, s)| m + s * rng.sample::<f64, _>(StandardNormal)).collect(),
            })
            .collect()
    }
}

/// `C_ij(h, u) = mean_s L(gamma^1_ij(h1 - V1_s u), gamma^2_ij(h2 - V2_s u))` on
/// `R^{d1} x R^{d2} x R` with draws fixed at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportMixture {
    pub first: KernelSpec,
    pub second: KernelSpec,
    pub transform: Laplace2dTransform,
    pub law: VelocityLaw,
    pub n_mc: usize,
    pub seed: u64,
    draws: Vec<Vec<f64>>,
}

pub fn transport_mixture(
    first: &KernelSpec,
    second: &KernelSpec,
    transform: Laplace2dTransform,
    law: VelocityLaw,
    n_mc: usize,
    seed: u64,
) -> Result<KernelSpec, KernelError> {
    const OP: &str = "transport_mixture";
    if first.m() != second.m() {
        return Err(KernelError::shape(OP, format!("m = {} vs {}", first.m(), second.m())));
    }
    if !first.is_stationary() || !second.is_stationary() {
        return Err(KernelError::param(OP, "spatial variograms must be stationary"));
    }
    if n_mc == 0 {
        return Err(KernelError::param(OP, "n_mc must be at least 1"));
    }
    transform.validate(OP)?;
    law.validate(OP)?;
    let d = first.dim() + second.dim();
    if law.len() != d {
        return Err(KernelError::shape(OP, format!("velocity has {} coordinates, expected {d}", law.len())));
    }
    let draws = law.draw(n_mc, seed);
    Ok(KernelSpec::new(TransportMixture { first: first.clone(), second: second.clone(), transform, law, n_mc, seed, draws }))
}

impl TransportMixture {
    pub fn draws(&self) -> &[Vec<f64>] {
        &self.draws
    }
}

fn moved(x: &[f64], v: &[f64], t: f64) -> Vec<f64> {
    x.iter().zip(v).map(|(a, b)| a - b * t).collect()
}

impl Component for TransportMixture {
    fn op(&self) -> &'static str {
        "transport_mixture"
    }
    fn m(&self) -> usize {
        self.first.m()
    }
    fn dim(&self) -> usize {
        self.first.dim() + self.second.dim() + 1
    }
    fn kind(&self) -> KernelKind {
        KernelKind::pd_if(self.first.kind().is_cnd() && self.second.kind().is_cnd())
    }
    fn stationary(&self) -> bool {
        true
    }
    fn eval(&self, x: &[f64], y: &[f64]) -> Result<Mat, KernelError> {
        let (d1, d) = (self.first.dim(), self.first.dim() + self.second.dim());
        let (tx, ty) = (x[d], y[d]);
        let m = self.m();
        let mut acc = Mat::zeros(m, m);
        for v in &self.draws {
            let (v1, v2) = v.split_at(d1);
            let g1 = self.first.eval(&moved(&x[..d1], v1, tx), &moved(&y[..d1], v1, ty))?;
            let g2 = self.second.eval(&moved(&x[d1..d], v2, tx), &moved(&y[d1..d], v2, ty))?;
            for j in 0..m {
                for i in 0..m {
                    acc[(i, j)] += self.transform.value(g1[(i, j)], g2[(i, j)]).map_err(|e| match e {
                        TransformError::Special(s) => KernelError::Special { op: self.op(), i, j, source: s },
                        other => KernelError::eval(self.op(), i, j, other.to_string()),
                    })?;
                }
            }
        }
        Ok(acc / self.draws.len() as f64)
    }
    fn children(&self) -> Vec<&KernelSpec> {
        vec![&self.first, &self.second]
    }
    fn caveats(&self) -> Vec<String> {
        vec![format!("velocity expectation approximated by {} frozen draws (seed {})", self.n_mc, self.seed)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pcv::pcv_power;

    fn gamma11() -> Laplace2dTransform {
        let g = LaplaceTransform::Gamma { shape: 1.0, rate: 1.0 };
        Laplace2dTransform::product(g, g)
    }

    #[test]
    fn zero_velocity_is_separable_argument() {
        let g1 = pcv_power(2, 1, 1.0, 1.0, None).unwrap();
        let g2 = pcv_power(2, 2, 1.5, 1.0, None).unwrap();
        let c = transport_mixture(&g1, &g2, gamma11(), VelocityLaw::Constant { v: vec![0.0; 3] }, 3, 1).unwrap();
        let (x, y) = ([0.3, 1.0, -1.0, 4.0], [0.0, 0.5, 0.5, 2.0]);
        let a = g1.evaluate(&x[..1], &y[..1]).unwrap()[(0, 1)];
        let b = g2.evaluate(&x[1..3], &y[1..3]).unwrap()[(0, 1)];
        let want = 1.0 / ((1.0 + a) * (1.0 + b));
        assert!((c.evaluate(&x, &y).unwrap()[(0, 1)] - want).abs() < 1e-15);
    }

    #[test]
    fn equal_times_drop_velocity() {
        let g1 = pcv_power(1, 1, 1.0, 1.0, None).unwrap();
        let law = VelocityLaw::Normal { mean: vec![0.0, 1.0], sd: vec![1.0, 2.0] };
        let c = transport_mixture(&g1, &g1, gamma11(), law, 64, 7).unwrap();
        let z = transport_mixture(&g1, &g1, gamma11(), VelocityLaw::Constant { v: vec![0.0, 0.0] }, 1, 0).unwrap();
        let (x, y) = ([0.4, -0.3, 2.0], [1.0, 0.9, 2.0]);
        assert!((c.evaluate(&x, &y).unwrap() - z.evaluate(&x, &y).unwrap()).amax() < 1e-15);
    }

    #[test]
    fn draws_are_reproducible() {
        let g1 = pcv_power(1, 1, 1.0, 1.0, None).unwrap();
        let law = VelocityLaw::Normal { mean: vec![0.0, 0.0], sd: vec![1.0, 1.0] };
        let a = transport_mixture(&g1, &g1, gamma11(), law.clone(), 16, 42).unwrap();
        let b = transport_mixture(&g1, &g1, gamma11(), law, 16, 42).unwrap();
        let (x, y) = ([0.4, -0.3, 2.0], [1.0, 0.9, 0.0]);
        assert_eq!(a.evaluate(&x, &y).unwrap(), b.evaluate(&x, &y).unwrap());
        let bad = VelocityLaw::Constant { v: vec![1.0] };
        assert!(transport_mixture(&g1, &g1, gamma11(), bad, 4, 0).is_err());
    }
}
