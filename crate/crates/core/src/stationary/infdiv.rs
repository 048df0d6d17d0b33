//! Infinitely divisible covariance families: every entrywise power is again
//! positive definite.

use std::f64::consts::PI;

use crate::error::KernelError;
use crate::kernel::{map_entries, require_positive, Component, KernelKind, KernelSpec, Mat, Node};

/// `C_ij(h) = (1 + b gamma_ij(h)) / (1 + a gamma_ij(h))`, `0 <= b <= a`.
#[derive(Debug, Clone, PartialEq)]
pub struct InfDivRatio {
    pub gamma: KernelSpec,
    pub a: f64,
    pub b: f64,
}

pub fn infdiv_ratio(gamma: &KernelSpec, a: f64, b: f64) -> Result<KernelSpec, KernelError> {
    const OP: &str = "infdiv_ratio";
    require_positive(OP, "a", a)?;
    if !(b >= 0.0) || !b.is_finite() {
        return Err(KernelError::param(OP, format!("b must be finite and non-negative, got {b}")));
    }
    if b > a {
        return Err(KernelError::param(OP, format!("b = {b} exceeds a = {a}; the ratio is not infinitely divisible")));
    }
    Ok(KernelSpec::new(InfDivRatio { gamma: gamma.clone(), a, b }))
}

impl Component for InfDivRatio {
    fn op(&self) -> &'static str {
        "infdiv_ratio"
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
        self.gamma.is_stationary()
    }
    fn eval(&self, x: &[f64], y: &[f64]) -> Result<Mat, KernelError> {
        let g = self.gamma.eval(x, y)?;
        map_entries(&g, |i, j, v| {
            if v < 0.0 {
                return Err(KernelError::eval(self.op(), i, j, format!("negative variogram value {v}")));
            }
            Ok((1.0 + self.b * v) / (1.0 + self.a * v))
        })
    }
    fn children(&self) -> Vec<&KernelSpec> {
        vec![&self.gamma]
    }
}

/// `C_ij(h) = cosh(nu sqrt(gamma_ij)) / cosh(sqrt(gamma_ij))`, `nu in [0, 1]`.
///
/// Positive definiteness follows from the product over the zeros
/// `i alpha_n`, `alpha_n = pi (n - 1/2)`, of cosh, an entire function of order
/// one with purely imaginary zeros:
/// `C = prod_n (1 + nu^2 gamma / alpha_n^2) / (1 + gamma / alpha_n^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoshRatio {
    pub gamma: KernelSpec,
    pub nu: f64,
}

pub fn cosh_ratio(gamma: &KernelSpec, nu: f64) -> Result<KernelSpec, KernelError> {
    if !(0.0..=1.0).contains(&nu) {
        return Err(KernelError::param("cosh_ratio", format!("nu must lie in [0, 1], got {nu}")));
    }
    Ok(KernelSpec::new(CoshRatio { gamma: gamma.clone(), nu }))
}

/// Closed form, stable for large `gamma`.
fn cosh_ratio_value(nu: f64, gamma: f64) -> f64 {
    let s = gamma.sqrt();
    ((nu - 1.0) * s).exp() * (1.0 + (-2.0 * nu * s).exp()) / (1.0 + (-2.0 * s).exp())
}

/// Partial product over the first `terms` zeros; with `tail_corrected` the
/// remaining factors are approximated to first order using
/// `sum_n 1 / alpha_n^2 = 1/2`.
pub fn cosh_ratio_product(nu: f64, gamma: f64, terms: usize, tail_corrected: bool) -> f64 {
    let mut prod = 1.0;
    let mut inv_sq = 0.0;
    for n in 1..=terms {
        let a2 = (PI * (n as f64 - 0.5)).powi(2);
        prod *= (1.0 + nu * nu * gamma / a2) / (1.0 + gamma / a2);
        inv_sq += 1.0 / a2;
    }
    if tail_corrected {
        prod *= (-(1.0 - nu * nu) * gamma * (0.5 - inv_sq)).exp();
    }
    prod
}

impl Component for CoshRatio {
    fn op(&self) -> &'static str {
        "cosh_ratio"
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
        self.gamma.is_stationary()
    }
    fn eval(&self, x: &[f64], y: &[f64]) -> Result<Mat, KernelError> {
        let g = self.gamma.eval(x, y)?;
        map_entries(&g, |i, j, v| {
            if v < 0.0 {
                return Err(KernelError::eval(self.op(), i, j, format!("negative variogram value {v}")));
            }
            Ok(cosh_ratio_value(self.nu, v))
        })
    }
    fn children(&self) -> Vec<&KernelSpec> {
        vec![&self.gamma]
    }
}

/// Whether `spec` belongs to a family whose infinite divisibility is established.
pub fn is_infinitely_divisible(spec: &KernelSpec) -> bool {
    match spec.node() {
        Node::InfDivRatio(_) | Node::CoshRatio(_) => spec.kind().is_pd(),
        Node::HadamardPower(p) => is_infinitely_divisible(&p.child),
        _ => false,
    }
}

/// Entrywise power `C_ij^r`, `r > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct HadamardPower {
    pub child: KernelSpec,
    pub r: f64,
}

pub fn hadamard_power(child: &KernelSpec, r: f64) -> Result<KernelSpec, KernelError> {
    require_positive("hadamard_power", "r", r)?;
    Ok(KernelSpec::new(HadamardPower { child: child.clone(), r }))
}

impl Component for HadamardPower {
    fn op(&self) -> &'static str {
        "hadamard_power"
    }
    fn m(&self) -> usize {
        self.child.m()
    }
    fn dim(&self) -> usize {
        self.child.dim()
    }
    fn kind(&self) -> KernelKind {
        if is_infinitely_divisible(&self.child) {
            KernelKind::PD
        } else {
            KernelKind::UNVALIDATED
        }
    }
    fn stationary(&self) -> bool {
        self.child.is_stationary()
    }
    fn eval(&self, x: &[f64], y: &[f64]) -> Result<Mat, KernelError> {
        let c = self.child.eval(x, y)?;
        map_entries(&c, |i, j, v| {
            if v < 0.0 {
                return Err(KernelError::eval(self.op(), i, j, format!("negative entry {v} has no real power")));
            }
            Ok(v.powf(self.r))
        })
    }
    fn children(&self) -> Vec<&KernelSpec> {
        vec![&self.child]
    }
}
