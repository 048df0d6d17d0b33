//! Non-stationary kernels: compactly supported Askey-Beta, locally
//! anisotropic Paciorek mixtures and a non-stationary Whittle-Matérn model.

use serde::{Deserialize, Serialize};

use crate::error::KernelError;
use crate::kernel::{diff, map_entries, require_finite, require_positive, sq_dist, Component, KernelKind, KernelSpec, Mat, Node, ScalarField};
use crate::linalg::SymMatrix;
use crate::special::{beta, matern_profile};

/// `C_ij(x, y) = s^{nu+1} B(gamma_ij + 1, nu + 1) (1 - |x - y| / s)_+^{nu + gamma_ij + 1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct AskeyBeta {
    pub gamma: KernelSpec,
    pub s: f64,
    pub nu: f64,
}

pub fn askey_beta(gamma: &KernelSpec, s: f64, nu: f64) -> Result<KernelSpec, KernelError> {
    const OP: &str = "askey_beta";
    require_positive(OP, "s", s)?;
    let need = 0.5 * (gamma.dim() as f64 + 1.0);
    if !(nu >= need) || !nu.is_finite() {
        return Err(KernelError::param(OP, format!("nu = {nu} is below (d + 1) / 2 = {need} for d = {}", gamma.dim())));
    }
    Ok(KernelSpec::new(AskeyBeta { gamma: gamma.clone(), s, nu }))
}

impl Component for AskeyBeta {
    fn op(&self) -> &'static str {
        "askey_beta"
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
        let g = self.gamma.eval(x, y)?;
        let r = sq_dist(x, y).sqrt() / self.s;
        map_entries(&g, |i, j, v| {
            if v < 0.0 {
                return Err(KernelError::eval(self.op(), i, j, format!("negative gamma value {v}")));
            }
            if r >= 1.0 {
                return Ok(0.0);
            }
            let b = beta(v + 1.0, self.nu + 1.0).map_err(KernelError::special(self.op(), i, j))?;
            Ok(self.s.powf(self.nu + 1.0) * b * (1.0 - r).powf(self.nu + v + 1.0))
        })
    }
    fn children(&self) -> Vec<&KernelSpec> {
        vec![&self.gamma]
    }
}

/// Location-dependent positive definite matrix `Sigma(x)` from a parametric
/// whitelist; every member is PD for all `x` by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum AnisotropyField {
    Constant {
        sigma: SymMatrix,
    },
    /// `exp(intercept + slope . x) * base`.
    Scaled {
        base: SymMatrix,
        intercept: f64,
        slope: Vec<f64>,
    },
    /// Planar ellipse `R(theta) diag(e^{2 a}, e^{2 b}) R(theta)^T` with
    /// `theta = angle + angle_slope . x` and log semi-axes
    /// `a = log_major + log_slope . x`, `b = log_minor + log_slope . x`.
    RotatingEllipse {
        angle: f64,
        angle_slope: Vec<f64>,
        log_major: f64,
        log_minor: f64,
        log_slope: Vec<f64>,
    },
}

impl AnisotropyField {
    fn validate(&self, op: &'static str, d: usize) -> Result<(), KernelError> {
        let pd = |name: &str, s: &SymMatrix| -> Result<(), KernelError> {
            if s.order() != d {
                return Err(KernelError::shape(op, format!("{name} has order {}, expected {d}", s.order())));
            }
            if s.as_matrix().clone().cholesky().is_none() {
                return Err(KernelError::param(op, format!("{name} is not positive definite")));
            }
            Ok(())
        };
        let len = |name: &str, v: &[f64]| -> Result<(), KernelError> {
            if v.len() != d {
                return Err(KernelError::shape(op, format!("{name} has length {}, expected {d}", v.len())));
            }
            require_finite(op, "field slope", v)
        };
        match self {
            Self::Constant { sigma } => pd("sigma", sigma),
            Self::Scaled { base, intercept, slope } => {
                pd("base", base)?;
                require_finite(op, "intercept", &[*intercept])?;
                len("slope", slope)
            }
            Self::RotatingEllipse { angle, angle_slope, log_major, log_minor, log_slope } => {
                if d != 2 {
                    return Err(KernelError::shape(op, format!("rotating ellipse needs d = 2, got {d}")));
                }
                require_finite(op, "ellipse parameters", &[*angle, *log_major, *log_minor])?;
                len("angle_slope", angle_slope)?;
                len("log_slope", log_slope)
            }
        }
    }

    pub fn at(&self, x: &[f64]) -> Mat {
        let dot = |v: &[f64]| v.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        match self {
            Self::Constant { sigma } => sigma.as_matrix().clone(),
            Self::Scaled { base, intercept, slope } => base.as_matrix() * (intercept + dot(slope)).exp(),
            Self::RotatingEllipse { angle, angle_slope, log_major, log_minor, log_slope } => {
                let th = angle + dot(angle_slope);
                let shift = dot(log_slope);
                let (l1, l2) = ((2.0 * (log_major + shift)).exp(), (2.0 * (log_minor + shift)).exp());
                let (c, s) = (th.cos(), th.sin());
                Mat::from_row_slice(2, 2, &[l1 * c * c + l2 * s * s, (l1 - l2) * c * s, (l1 - l2) * c * s, l1 * s * s + l2 * c * c])
            }
        }
    }

    fn is_constant(&self) -> bool {
        match self {
            Self::Constant { .. } => true,
            Self::Scaled { slope, .. } => slope.iter().all(|v| *v == 0.0),
            Self::RotatingEllipse { angle_slope, log_slope, .. } => angle_slope.iter().chain(log_slope).all(|v| *v == 0.0),
        }
    }
}

/// One anisotropy field per variable on `R^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalAnisotropyField {
    pub dim: usize,
    pub sigmas: Vec<AnisotropyField>,
}

/// Prefactor and quadratic form of the Paciorek construction at `(x, i; y, j)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PaciorekTerms {
    /// `|Sigma_i(x)|^{1/4} |Sigma_j(y)|^{1/4} / |Sigma_ij|^{1/2}`, at most one.
    pub prefactor: f64,
    /// `(x - y)^T Sigma_ij^{-1} (x - y)`.
    pub quadratic_form: f64,
}

impl LocalAnisotropyField {
    fn validate(&self, op: &'static str, m: usize) -> Result<(), KernelError> {
        if self.sigmas.len() != m {
            return Err(KernelError::shape(op, format!("{} anisotropy fields for m = {m}", self.sigmas.len())));
        }
        self.sigmas.iter().try_for_each(|s| s.validate(op, self.dim))
    }

    pub fn m(&self) -> usize {
        self.sigmas.len()
    }

    fn is_constant(&self) -> bool {
        self.sigmas.iter().all(AnisotropyField::is_constant)
    }

    pub fn terms(&self, x: &[f64], y: &[f64], i: usize, j: usize) -> Result<PaciorekTerms, String> {
        let si = self.sigmas[i].at(x);
        let sj = self.sigmas[j].at(y);
        let mid = (&si + &sj) * 0.5;
        let logdet = |a: Mat, name: &str| -> Result<(f64, nalgebra::Cholesky<f64, nalgebra::Dyn>), String> {
            let c = a.cholesky().ok_or_else(|| format!("{name} is not positive definite"))?;
            let ld = 2.0 * c.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>();
            Ok((ld, c))
        };
        let (li, _) = logdet(si, "Sigma_i(x)")?;
        let (lj, _) = logdet(sj, "Sigma_j(y)")?;
        let (lm, chol) = logdet(mid, "Sigma_ij(x, y)")?;
        let h = nalgebra::DVector::from_vec(diff(x, y));
        let quadratic_form = h.dot(&chol.solve(&h));
        Ok(PaciorekTerms { prefactor: (0.25 * (li + lj) - 0.5 * lm).exp(), quadratic_form })
    }
}

/// Node of a one-dimensional quadrature measure on `(0, inf)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadNode {
    pub t: f64,
    pub w: f64,
}

/// `C_ij(x, y) = prefactor * sum_k w_k exp(-t_k (QF + gamma_ij(x, y)))`.
#[derive(Debug, Clone, PartialEq)]
pub struct PaciorekMixture {
    pub field: LocalAnisotropyField,
    pub gamma: KernelSpec,
    pub nodes: Vec<QuadNode>,
}

pub fn paciorek_mixture(field: LocalAnisotropyField, gamma: &KernelSpec, nodes: Vec<QuadNode>) -> Result<KernelSpec, KernelError> {
    const OP: &str = "paciorek_mixture";
    field.validate(OP, gamma.m())?;
    if gamma.dim() != field.dim {
        return Err(KernelError::shape(OP, format!("gamma has dimension {}, field {}", gamma.dim(), field.dim)));
    }
    if nodes.is_empty() {
        return Err(KernelError::param(OP, "quadrature measure needs at least one node"));
    }
    for (k, n) in nodes.iter().enumerate() {
        if !(n.t > 0.0) || !(n.w >= 0.0) || !n.t.is_finite() || !n.w.is_finite() {
            return Err(KernelError::param(OP, format!("node {k} needs t > 0 and w >= 0, got ({}, {})", n.t, n.w)));
        }
    }
    Ok(KernelSpec::new(PaciorekMixture { field, gamma: gamma.clone(), nodes }))
}

impl Component for PaciorekMixture {
    fn op(&self) -> &'static str {
        "paciorek_mixture"
    }
    fn m(&self) -> usize {
        self.field.m()
    }
    fn dim(&self) -> usize {
        self.field.dim
    }
    fn kind(&self) -> KernelKind {
        KernelKind::pd_if(self.gamma.kind().is_cnd())
    }
    fn stationary(&self) -> bool {
        self.field.is_constant() && self.gamma.is_stationary()
    }
    fn eval(&self, x: &[f64], y: &[f64]) -> Result<Mat, KernelError> {
        let g = self.gamma.eval(x, y)?;
        map_entries(&g, |i, j, v| {
            let t = self.field.terms(x, y, i, j).map_err(|e| KernelError::eval(self.op(), i, j, e))?;
            let s: f64 = self.nodes.iter().map(|n| n.w * (-n.t * (t.quadratic_form + v)).exp()).sum();
            let out = t.prefactor * s;
            if !out.is_finite() {
                return Err(KernelError::eval(self.op(), i, j, "mixture integral is not finite"));
            }
            Ok(out)
        })
    }
    fn children(&self) -> Vec<&KernelSpec> {
        vec![&self.gamma]
    }
}

/// `C_ij(x, y) = prefactor * 2^{nubar} M_{nubar}(sqrt(QF + G_ij(x, y)))` with
/// `nubar = nu_i(x) / 2 + nu_j(y) / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct NonstationaryMatern {
    pub field: LocalAnisotropyField,
    pub nu: Vec<ScalarField>,
    pub g: KernelSpec,
}

pub fn nonstationary_matern(field: LocalAnisotropyField, nu: Vec<ScalarField>, g: &KernelSpec) -> Result<KernelSpec, KernelError> {
    const OP: &str = "nonstationary_matern";
    field.validate(OP, g.m())?;
    if g.dim() != field.dim {
        return Err(KernelError::shape(OP, format!("G has dimension {}, field {}", g.dim(), field.dim)));
    }
    if nu.len() != g.m() {
        return Err(KernelError::shape(OP, format!("{} smoothness fields for m = {}", nu.len(), g.m())));
    }
    for f in &nu {
        if !f.is_finite() {
            return Err(KernelError::param(OP, "non-finite smoothness parameter"));
        }
        if let Some(d) = f.required_dim() {
            if d != field.dim {
                return Err(KernelError::shape(OP, format!("smoothness slope has length {d}, expected {}", field.dim)));
            }
        }
    }
    Ok(KernelSpec::new(NonstationaryMatern { field, nu, g: g.clone() }))
}

impl NonstationaryMatern {
    /// Entry `(i, j)` from its parts: smoothness `nubar`, prefactor and the
    /// Bessel argument `sqrt(QF + G_ij)`.
    pub fn entry(nubar: f64, prefactor: f64, qf: f64, g: f64) -> Result<f64, String> {
        if !(nubar > 0.0) {
            return Err(format!("smoothness {nubar} is not positive"));
        }
        let r = (qf + g).sqrt();
        let m = matern_profile(nubar, r).map_err(|e| e.to_string())?;
        Ok(prefactor * nubar.exp2() * m)
    }

    /// `G` constant and non-negative: the only case in which the displayed
    /// form is a Schoenberg mixture of Paciorek kernels with a valid sign.
    fn constant_g(&self) -> bool {
        matches!(self.g.node(), Node::Constant(c) if c.value >= 0.0)
    }

    /// One smoothness shared by every component and location. The form lacks
    /// the `Gamma(nubar)` weight the mixture produces, and the missing factor
    /// `Gamma((a + b) / 2)` is not positive semi-definite in `(a, b)`, so
    /// distinct constants already break definiteness.
    fn common_nu(&self) -> bool {
        let origin = vec![0.0; self.field.dim];
        let first = self.nu[0].value(&origin);
        self.nu.iter().all(|f| f.is_constant() && f.value(&origin) == first)
    }
}

impl Component for NonstationaryMatern {
    fn op(&self) -> &'static str {
        "nonstationary_matern"
    }
    fn m(&self) -> usize {
        self.field.m()
    }
    fn dim(&self) -> usize {
        self.field.dim
    }
    fn kind(&self) -> KernelKind {
        KernelKind::pd_if(self.constant_g() && self.common_nu())
    }
    fn stationary(&self) -> bool {
        self.field.is_constant() && self.g.is_stationary() && self.nu.iter().all(ScalarField::is_constant)
    }
    fn eval(&self, x: &[f64], y: &[f64]) -> Result<Mat, KernelError> {
        let g = self.g.eval(x, y)?;
        map_entries(&g, |i, j, gv| {
            if gv < 0.0 {
                return Err(KernelError::eval(self.op(), i, j, format!("G entry {gv} is negative")));
            }
            let t = self.field.terms(x, y, i, j).map_err(|e| KernelError::eval(self.op(), i, j, e))?;
            let nubar = 0.5 * (self.nu[i].value(x) + self.nu[j].value(y));
            Self::entry(nubar, t.prefactor, t.quadratic_form, gv).map_err(|e| KernelError::eval(self.op(), i, j, e))
        })
    }
    fn children(&self) -> Vec<&KernelSpec> {
        vec![&self.g]
    }
    fn caveats(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.constant_g() {
            out.push("non-constant G can raise off-diagonal values above the diagonal; no validity claim".into());
        }
        if !self.common_nu() {
            out.push("smoothness differs across components or locations; no validity claim".into());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::constant;
    use crate::pcv::pcv_power;

    fn identity_field(m: usize, d: usize) -> LocalAnisotropyField {
        LocalAnisotropyField { dim: d, sigmas: vec![AnisotropyField::Constant { sigma: SymMatrix::identity(d).unwrap() }; m] }
    }

    #[test]
    fn askey_diagonal_and_support() {
        let g = pcv_power(2, 1, 1.0, 1.0, None).unwrap();
        let c = askey_beta(&g, 1.0, 2.0).unwrap();
        let v = c.evaluate(&[0.4], &[0.4]).unwrap();
        assert!((v[(0, 0)] - 1.0 / 3.0).abs() < 1e-13);
        assert_eq!(c.evaluate(&[1.0], &[0.0]).unwrap(), Mat::zeros(2, 2));
        assert_eq!(c.evaluate(&[0.0], &[2.5]).unwrap(), Mat::zeros(2, 2));
        let g2 = pcv_power(1, 3, 1.0, 1.0, None).unwrap();
        assert!(askey_beta(&g2, 1.0, 1.5).is_err());
    }

    #[test]
    fn paciorek_reduces_to_gaussian() {
        let z = constant(1, 2, 0.0).unwrap();
        let c = paciorek_mixture(identity_field(1, 2), &z, vec![QuadNode { t: 1.0, w: 1.0 }]).unwrap();
        let v = c.evaluate(&[0.0, 0.0], &[0.6, 0.8]).unwrap()[(0, 0)];
        assert!((v - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn paciorek_prefactor_bounded() {
        let field = LocalAnisotropyField {
            dim: 2,
            sigmas: vec![
                AnisotropyField::RotatingEllipse {
                    angle: 0.3,
                    angle_slope: vec![1.0, -0.5],
                    log_major: 0.2,
                    log_minor: -0.4,
                    log_slope: vec![0.3, 0.1],
                },
                AnisotropyField::Scaled { base: SymMatrix::identity(2).unwrap(), intercept: 0.1, slope: vec![-0.2, 0.4] },
            ],
        };
        for (x, y) in [([0.0, 0.0], [1.0, 2.0]), ([-1.5, 0.3], [0.7, -2.0]), ([0.2, 0.2], [0.2, 0.2])] {
            for i in 0..2 {
                for j in 0..2 {
                    let t = field.terms(&x, &y, i, j).unwrap();
                    assert!(t.prefactor <= 1.0 + 1e-14);
                    if i == j && x == y {
                        assert!((t.prefactor - 1.0).abs() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn matern_stationary_limit() {
        let nu = 1.5;
        let g = constant(1, 2, 0.0).unwrap();
        let c = nonstationary_matern(identity_field(1, 2), vec![ScalarField::constant(nu)], &g).unwrap();
        assert!(c.kind().is_pd());
        let v0 = c.evaluate(&[0.3, 0.3], &[0.3, 0.3]).unwrap()[(0, 0)];
        assert!((v0 - nu.exp2()).abs() < 1e-14);
        let near = NonstationaryMatern::entry(nu, 1.0, 1e-12, 0.0).unwrap();
        assert!((near - v0).abs() < 1e-10);
        let r: f64 = 0.7;
        let v = c.evaluate(&[0.0, 0.0], &[r, 0.0]).unwrap()[(0, 0)];
        assert!((v - nu.exp2() * (1.0 + r) * (-r).exp()).abs() < 1e-13);
    }

    #[test]
    fn claim_needs_common_smoothness_and_constant_g() {
        let field = identity_field(2, 1);
        let equal = vec![ScalarField::constant(1.5); 2];
        let zero = constant(2, 1, 0.0).unwrap();
        assert!(nonstationary_matern(field.clone(), equal.clone(), &constant(2, 1, 0.3).unwrap()).unwrap().kind().is_pd());
        let distinct = vec![ScalarField::constant(0.5), ScalarField::constant(3.0)];
        assert!(!nonstationary_matern(field.clone(), distinct.clone(), &zero).unwrap().kind().is_pd());
        let ones = SymMatrix::from_fn(2, |_, _| 1.0).unwrap();
        let expg =
            crate::kernel::scale(&crate::kernel::covariance(2, 1, crate::kernel::CovShape::Exponential, 1.0, Some(ones)).unwrap(), 0.5).unwrap();
        assert!(!nonstationary_matern(field.clone(), equal, &expg).unwrap().kind().is_pd());

        let k = nonstationary_matern(field, distinct, &zero).unwrap();
        let r = crate::validation::check_pd(&k, &crate::validation::ValidationConfig::new(1));
        assert!(r.failed(), "{r:?}");
    }

    #[test]
    fn g_enters_only_the_bessel_argument() {
        let field = identity_field(2, 1);
        let nu = vec![ScalarField::constant(0.8), ScalarField::Affine { intercept: 1.0, slope: vec![0.5] }];
        let (x, y) = ([0.3], [1.1]);
        for c in [0.0, 0.4, 2.0] {
            let k = nonstationary_matern(field.clone(), nu.clone(), &constant(2, 1, c).unwrap()).unwrap();
            let v = k.evaluate(&x, &y).unwrap();
            let t = field.terms(&x, &y, 0, 1).unwrap();
            let nubar = 0.5 * (0.8 + 1.0 + 0.5 * 1.1);
            let want = NonstationaryMatern::entry(nubar, t.prefactor, t.quadratic_form, c).unwrap();
            assert_eq!(v[(0, 1)], want);
        }
        let v = nonstationary_matern(field, nu, &constant(2, 1, 0.6).unwrap()).unwrap().evaluate(&[0.2], &[0.2]).unwrap();
        let want = (0.8f64).exp2() * matern_profile(0.8, 0.6f64.sqrt()).unwrap();
        assert!((v[(0, 0)] - want).abs() < 1e-14);
    }
}
