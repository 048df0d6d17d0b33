//! Pseudo cross-variogram families and the constructions that produce
//! conditionally negative definite matrix-valued kernels.

use serde::{Deserialize, Serialize};

use crate::error::KernelError;
use crate::kernel::{
    diff, map_entries, require_positive, sq_norm, Component, Derivatives, KernelKind, KernelSpec, Mat, PointSet, RadialProfile, ScalarField,
};
use crate::linalg::SymMatrix;

/// Scalar variogram profile `v(r)` of `r = |h| / scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum VariogramShape {
    /// `r^alpha`
    Power { alpha: f64 },
    /// `1 - e^{-r^2}`
    Gaussian,
    /// `1 - e^{-r}`
    Exponential,
    /// `(1 + r^2)^beta - 1`
    Cauchy { beta: f64 },
}

impl VariogramShape {
    /// Whether the profile is a valid variogram in every dimension.
    pub fn is_valid(self) -> bool {
        match self {
            Self::Power { alpha } => alpha > 0.0 && alpha <= 2.0,
            Self::Gaussian | Self::Exponential => true,
            Self::Cauchy { beta } => beta > 0.0 && beta <= 1.0,
        }
    }

    fn op(self, checked: bool) -> &'static str {
        match self {
            Self::Power { .. } if checked => "pcv_power",
            Self::Power { .. } => "power_law",
            Self::Gaussian => "pcv_gaussian",
            Self::Exponential => "pcv_exponential",
            Self::Cauchy { .. } => "pcv_cauchy",
        }
    }

    /// Profile as a function of `q = r^2`: `(v, dv/dq, d2v/dq2)`; `None` where
    /// not twice differentiable in `q`.
    fn in_q(self, q: f64) -> (f64, Option<(f64, f64)>) {
        match self {
            Self::Power { alpha } => {
                let v = if q == 0.0 { 0.0 } else { q.powf(0.5 * alpha) };
                let d = if alpha == 2.0 { Some((1.0, 0.0)) } else { None };
                (v, d)
            }
            Self::Gaussian => {
                let e = (-q).exp();
                (-(-q).exp_m1(), Some((e, -e)))
            }
            Self::Exponential => (-(-q.sqrt()).exp_m1(), None),
            Self::Cauchy { beta } => {
                let v = (beta * q.ln_1p()).exp_m1();
                let d1 = beta * (1.0 + q).powf(beta - 1.0);
                let d2 = beta * (beta - 1.0) * (1.0 + q).powf(beta - 2.0);
                (v, Some((d1, d2)))
            }
        }
    }

    fn smooth(self) -> bool {
        !matches!(self, Self::Exponential) && !matches!(self, Self::Power { alpha } if alpha != 2.0)
    }
}

/// `gamma_ij(x, y) = b_ij v(|x - y| / scale)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VariogramKernel {
    pub dim: usize,
    pub shape: VariogramShape,
    pub scale: f64,
    pub sill: SymMatrix,
    /// `false` for the unrestricted `power_law` family.
    pub checked: bool,
}

impl VariogramKernel {
    fn constant_sill(&self) -> bool {
        let b = self.sill.get(0, 0);
        self.sill.as_matrix().iter().all(|&v| v == b)
    }
}

fn variogram(
    op: &'static str,
    m: usize,
    dim: usize,
    shape: VariogramShape,
    scale: f64,
    sill: Option<SymMatrix>,
    checked: bool,
) -> Result<KernelSpec, KernelError> {
    crate::kernel::constant(m, dim, 0.0)?;
    require_positive(op, "scale", scale)?;
    if checked && !shape.is_valid() {
        return Err(KernelError::param(op, format!("{shape:?} is outside the valid range")));
    }
    if let VariogramShape::Power { alpha } = shape {
        require_positive(op, "alpha", alpha)?;
    }
    let sill = match sill {
        Some(s) => s,
        None => SymMatrix::from_fn(m, |_, _| 1.0).map_err(|e| KernelError::param(op, e.to_string()))?,
    };
    if sill.order() != m {
        return Err(KernelError::shape(op, format!("sill has order {}, expected {m}", sill.order())));
    }
    if sill.as_matrix().iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
        return Err(KernelError::param(op, "sill entries must be finite and non-negative"));
    }
    crate::kernel::leaves::require_psd(op, "sill", &sill)?;
    Ok(KernelSpec::new(VariogramKernel { dim, shape, scale, sill, checked }))
}

/// Power variogram `b_ij |h/s|^alpha`, `alpha in (0, 2]`. The pseudo
/// cross-variogram claim holds for a constant sill; other PSD sills yield a
/// cross-variogram only.
pub fn pcv_power(m: usize, dim: usize, alpha: f64, scale: f64, sill: Option<SymMatrix>) -> Result<KernelSpec, KernelError> {
    variogram("pcv_power", m, dim, VariogramShape::Power { alpha }, scale, sill, true)
}

/// Power law `b_ij |h/s|^alpha` for any `alpha > 0`, claims only when `alpha <= 2`.
pub fn power_law(m: usize, dim: usize, alpha: f64, scale: f64, sill: Option<SymMatrix>) -> Result<KernelSpec, KernelError> {
    variogram("power_law", m, dim, VariogramShape::Power { alpha }, scale, sill, false)
}

/// Any whitelisted variogram profile with a PSD sill.
pub fn pcv_shape(m: usize, dim: usize, shape: VariogramShape, scale: f64, sill: Option<SymMatrix>) -> Result<KernelSpec, KernelError> {
    variogram(shape.op(true), m, dim, shape, scale, sill, true)
}

impl Component for VariogramKernel {
    fn op(&self) -> &'static str {
        self.shape.op(self.checked)
    }
    fn m(&self) -> usize {
        self.sill.order()
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn kind(&self) -> KernelKind {
        if !self.shape.is_valid() {
            return KernelKind::UNVALIDATED;
        }
        let pcv = self.constant_sill();
        KernelKind { positive_definite: false, conditionally_negative_definite: pcv, pseudo_variogram: pcv, cross_variogram: true }
    }
    fn stationary(&self) -> bool {
        true
    }
    fn eval(&self, x: &[f64], y: &[f64]) -> Result<Mat, KernelError> {
        let q = sq_norm(&diff(x, y)) / (self.scale * self.scale);
        Ok(self.sill.as_matrix() * self.shape.in_q(q).0)
    }
    fn derivatives(&self, x: &[f64], y: &[f64], axis: usize) -> Option<Result<Derivatives, KernelError>> {
        let h = diff(x, y);
        let s2 = self.scale * self.scale;
        let q = sq_norm(&h) / s2;
        let (v, d) = self.shape.in_q(q);
        let (d1, d2) = d?;
        // q = |h|^2 / s^2, dq/dh_k = 2 h_k / s^2.
        let dq = 2.0 * h[axis] / s2;
        let b = self.sill.as_matrix();
        Some(Ok(Derivatives { value: b * v, first: b * (d1 * dq), second: b * (d2 * dq * dq + d1 * 2.0 / s2) }))
    }
    fn has_derivatives(&self, _axis: usize) -> bool {
        self.shape.smooth()
    }
    fn radial(&self, t: f64) -> Option<Result<RadialProfile, KernelError>> {
        let s2 = self.scale * self.scale;
        let (v, d) = self.shape.in_q(t / s2);
        let (d1, _) = d?;
        let b = self.sill.as_matrix();
        Some(Ok(RadialProfile { value: b * v, slope: b * (d1 / s2) }))
    }
    fn has_radial(&self) -> bool {
        self.shape.smooth()
    }
}

/// A kernel carrying the pseudo cross-variogram claim.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoVariogramModel {
    spec: KernelSpec,
}

impl PseudoVariogramModel {
    pub fn new(spec: KernelSpec) -> Result<Self, KernelError> {
        if !spec.kind().is_pcv() {
            return Err(KernelError::param("pseudo_variogram", format!("{} does not carry the pseudo cross-variogram claim", spec.op())));
        }
        Ok(Self { spec })
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    /// Construction that produced the model.
    pub fn provenance(&self) -> &'static str {
        self.spec.op()
    }

    pub fn into_spec(self) -> KernelSpec {
        self.spec
    }
}

/// `gamma_ij(x, y) = g_i(x) + g_j(y) - C_ij(x, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GMinusC {
    pub g: Vec<ScalarField>,
    pub c: KernelSpec,
    kind: KernelKind,
}

pub fn pcv_from_g_and_c(g: Vec<ScalarField>, c: &KernelSpec) -> Result<KernelSpec, KernelError> {
    const OP: &str = "pcv_from_g_and_c";
    if g.len() != c.m() {
        return Err(KernelError::shape(OP, format!("{} functions for an {}-variate kernel", g.len(), c.m())));
    }
    for f in &g {
        if !f.is_finite() {
            return Err(KernelError::param(OP, "non-finite field parameter"));
        }
        if let Some(d) = f.required_dim() {
            if d != c.dim() {
                return Err(KernelError::shape(OP, format!("field slope has length {d}, expected {}", c.dim())));
            }
        }
    }
    let kind = if !c.kind().is_pd() {
        KernelKind::UNVALIDATED
    } else if g.iter().all(ScalarField::is_constant) && c.is_stationary() {
        let origin = vec![0.0; c.dim()];
        let c0 = c.eval(&origin, &origin)?;
        let zero_diag = g.iter().enumerate().all(|(i, f)| {
            let two_g = 2.0 * f.value(&origin);
            (two_g - c0[(i, i)]).abs() <= 1e-12 * c0[(i, i)].abs().max(1.0)
        });
        if zero_diag {
            KernelKind::PCV
        } else {
            KernelKind::CND
        }
    } else {
        KernelKind::CND
    };
    Ok(KernelSpec::new(GMinusC { g, c: c.clone(), kind }))
}

impl Component for GMinusC {
    fn op(&self) -> &'static str {
        "pcv_from_g_and_c"
    }
    fn m(&self) -> usize {
        self.c.m()
    }
    fn dim(&self) -> usize {
        self.c.dim()
    }
    fn kind(&self) -> KernelKind {
        self.kind
    }
    fn stationary(&self) -> bool {
        self.c.is_stationary() && self.g.iter().all(ScalarField::is_constant)
    }
    fn eval(&self, x: &[f64], y: &[f64]) -> Result<Mat, KernelError> {
        let c = self.c.eval(x, y)?;
        let gx: Vec<f64> = self.g.iter().map(|f| f.value(x)).collect();
        let gy: Vec<f64> = self.g.iter().map(|f| f.value(y)).collect();
        map_entries(&c, |i, j, v| Ok(gx[i] + gy[j] - v))
    }
    fn children(&self) -> Vec<&KernelSpec> {
        vec![&self.c]
    }
    fn derivatives(&self, x: &[f64], y: &[f64], axis: usize) -> Option<Result<Derivatives, KernelError>> {
        let d = match self.c.derivatives(x, y, axis)? {
            Ok(d) => d,
            Err(e) => return Some(Err(e)),
        };
        let m = self.m();
        let gx: Vec<(f64, f64, f64)> = self.g.iter().map(|f| f.partials(x, axis)).collect();
        let gy: Vec<f64> = self.g.iter().map(|f| f.value(y)).collect();
        Some(Ok(Derivatives {
            value: Mat::from_fn(m, m, |i, j| gx[i].0 + gy[j] - d.value[(i, j)]),
            first: Mat::from_fn(m, m, |i, j| gx[i].1 - d.first[(i, j)]),
            second: Mat::from_fn(m, m, |i, j| gx[i].2 - d.second[(i, j)]),
        }))
    }
    fn has_derivatives(&self, axis: usize) -> bool {
        self.c.has_derivatives(axis)
    }
    fn caveats(&self) -> Vec<String> {
        vec!["free functions g_i may make entries negative; increment-variance reading does not apply there".into()]
    }
}

/// Pseudo cross-variogram from a non-stationary cross-variogram.
#[derive(Debug, Clone, PartialEq)]
pub struct FromCrossVariogram {
    pub tilde: KernelSpec,
}

pub fn pcv_from_cross_variogram(tilde: &KernelSpec) -> Result<KernelSpec, KernelError> {
    if !tilde.kind().cross_variogram {
        return Err(KernelError::param("pcv_from_cross_variogram", format!("{} is not a cross-variogram built from PSD sills", tilde.op())));
    }
    Ok(KernelSpec::new(FromCrossVariogram { tilde: tilde.clone() }))
}

impl Component for FromCrossVariogram {
    fn op(&self) -> &'static str {
        "pcv_from_cross_variogram"
    }
    fn m(&self) -> usize {
        self.tilde.m()
    }
    fn dim(&self) -> usize {
        self.tilde.dim()
    }
    fn kind(&self) -> KernelKind {
        KernelKind::PCV
    }
    fn stationary(&self) -> bool {
        false
    }
    fn eval(&self, x: &[f64], y: &[f64]) -> Result<Mat, KernelError> {
        let origin = vec![0.0; self.dim()];
        let a = self.tilde.eval(x, &origin)?;
        let b = self.tilde.eval(y, &origin)?;
        let c = self.tilde.eval(x, y)?;
        let m = self.m();
        Ok(Mat::from_fn(m, m, |i, j| a[(i, i)] + b[(j, j)] - (a[(i, j)] + b[(i, j)] - c[(i, j)])))
    }
    fn children(&self) -> Vec<&KernelSpec> {
        vec![&self.tilde]
    }
}

/// `gamma_ij(h) = gamma0(h) + (C_ii(0) + C_jj(0))/2 - C_ij(h)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OestingPcv {
    pub gamma0: KernelSpec,
    pub c: KernelSpec,
    c0_diag: Vec<f64>,
}

pub fn pcv_oesting(gamma0: &KernelSpec, c: &KernelSpec) -> Result<KernelSpec, KernelError> {
    const OP: &str = "pcv_oesting";
    if gamma0.m() != 1 {
        return Err(KernelError::shape(OP, "gamma0 must be univariate"));
    }
    if gamma0.dim() != c.dim() {
        return Err(KernelError::shape(OP, format!("gamma0 has dim {}, C has dim {}", gamma0.dim(), c.dim())));
    }
    if !c.is_stationary() {
        return Err(KernelError::param(OP, "C must be stationary"));
    }
    if !gamma0.is_stationary() {
        return Err(KernelError::param(OP, "gamma0 must be stationary"));
    }
    let origin = vec![0.0; c.dim()];
    let c0 = c.eval(&origin, &origin)?;
    let c0_diag = (0..c.m()).map(|i| c0[(i, i)]).collect();
    Ok(KernelSpec::new(OestingPcv { gamma0: gamma0.clone(), c: c.clone(), c0_diag }))
}

impl Component for OestingPcv {
    fn op(&self) -> &'static str {
        "pcv_oesting"
    }
    fn m(&self) -> usize {
        self.c.m()
    }
    fn dim(&self) -> usize {
        self.c.dim()
    }
    fn kind(&self) -> KernelKind {
        if self.gamma0.kind().is_pcv() && self.c.kind().is_pd() {
            KernelKind::PCV
        } else {
            KernelKind::UNVALIDATED
        }
    }
    fn stationary(&self) -> bool {
        true
    }
    fn eval(&self, x: &[f64], y: &[f64]) -> Result<Mat, KernelError> {
        let g = self.gamma0.eval(x, y)?[(0, 0)];
        let c = self.c.eval(x, y)?;
        let d = &self.c0_diag;
        map_entries(&c, |i, j, v| Ok(g + 0.5 * (d[i] + d[j]) - v))
    }
    fn children(&self) -> Vec<&KernelSpec> {
        vec![&self.gamma0, &self.c]
    }
    fn derivatives(&self, x: &[f64], y: &[f64], axis: usize) -> Option<Result<Derivatives, KernelError>> {
        let g = self.gamma0.derivatives(x, y, axis)?;
        let c = self.c.derivatives(x, y, axis)?;
        Some(g.and_then(|g| {
            let c = c?;
            let m = self.m();
            let d = &self.c0_diag;
            Ok(Derivatives {
                value: Mat::from_fn(m, m, |i, j| g.value[(0, 0)] + 0.5 * (d[i] + d[j]) - c.value[(i, j)]),
                first: Mat::from_fn(m, m, |i, j| g.first[(0, 0)] - c.first[(i, j)]),
                second: Mat::from_fn(m, m, |i, j| g.second[(0, 0)] - c.second[(i, j)]),
            })
        }))
    }
    fn has_derivatives(&self, axis: usize) -> bool {
        self.gamma0.has_derivatives(axis) && self.c.has_derivatives(axis)
    }
    fn radial(&self, t: f64) -> Option<Result<RadialProfile, KernelError>> {
        let g = self.gamma0.radial(t)?;
        let c = self.c.radial(t)?;
        Some(g.and_then(|g| {
            let c = c?;
            let m = self.m();
            let d = &self.c0_diag;
            Ok(RadialProfile {
                value: Mat::from_fn(m, m, |i, j| g.value[(0, 0)] + 0.5 * (d[i] + d[j]) - c.value[(i, j)]),
                slope: Mat::from_fn(m, m, |i, j| g.slope[(0, 0)] - c.slope[(i, j)]),
            })
        }))
    }
    fn has_radial(&self) -> bool {
        self.gamma0.has_radial() && self.c.has_radial()
    }
    fn caveats(&self) -> Vec<String> {
        vec!["cross entries of the Oesting construction may be negative; use negative_entries to scan".into()]
    }
}

/// `gamma_ij(h) = gamma0(h + tau_j - tau_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayPcv {
    pub gamma0: KernelSpec,
    pub delays: Vec<Vec<f64>>,
}

pub fn pcv_delay(gamma0: &KernelSpec, delays: Vec<Vec<f64>>) -> Result<KernelSpec, KernelError> {
    const OP: &str = "pcv_delay";
    if gamma0.m() != 1 {
        return Err(KernelError::shape(OP, "gamma0 must be univariate"));
    }
    if !gamma0.is_stationary() {
        return Err(KernelError::param(OP, "gamma0 must be stationary"));
    }
    if delays.is_empty() {
        return Err(KernelError::shape(OP, "needs at least one delay"));
    }
    for (i, t) in delays.iter().enumerate() {
        if t.len() != gamma0.dim() {
            return Err(KernelError::shape(OP, format!("delay {i} has length {}, expected {}", t.len(), gamma0.dim())));
        }
        crate::kernel::require_finite(OP, "delay", t)?;
    }
    Ok(KernelSpec::new(DelayPcv { gamma0: gamma0.clone(), delays }))
}

impl DelayPcv {
    fn shifted(&self, x: &[f64], i: usize, j: usize) -> Vec<f64> {
        x.iter().zip(&self.delays[j]).zip(&self.delays[i]).map(|((a, tj), ti)| a + tj - ti).collect()
    }
}

impl Component for DelayPcv {
    fn op(&self) -> &'static str {
        "pcv_delay"
    }
    fn m(&self) -> usize {
        self.delays.len()
    }
    fn dim(&self) -> usize {
        self.gamma0.dim()
    }
    fn kind(&self) -> KernelKind {
        if self.gamma0.kind().is_pcv() {
            KernelKind::PCV
        } else {
            KernelKind::UNVALIDATED
        }
    }
    fn stationary(&self) -> bool {
        true
    }
    fn eval(&self, x: &[f64], y: &[f64]) -> Result<Mat, KernelError> {
        let m = self.m();
        let mut out = Mat::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                out[(i, j)] = self.gamma0.eval(&self.shifted(x, i, j), y)?[(0, 0)];
            }
        }
        Ok(out)
    }
    fn children(&self) -> Vec<&KernelSpec> {
        vec![&self.gamma0]
    }
    fn derivatives(&self, x: &[f64], y: &[f64], axis: usize) -> Option<Result<Derivatives, KernelError>> {
        if !self.gamma0.has_derivatives(axis) {
            return None;
        }
        let m = self.m();
        let mut out = Derivatives::constant(Mat::zeros(m, m));
        for i in 0..m {
            for j in 0..m {
                let d = match self.gamma0.derivatives(&self.shifted(x, i, j), y, axis)? {
                    Ok(d) => d,
                    Err(e) => return Some(Err(e)),
                };
                out.value[(i, j)] = d.value[(0, 0)];
                out.first[(i, j)] = d.first[(0, 0)];
                out.second[(i, j)] = d.second[(0, 0)];
            }
        }
        Some(Ok(out))
    }
    fn has_derivatives(&self, axis: usize) -> bool {
        self.gamma0.has_derivatives(axis)
    }
}

/// Bernstein functions vanishing at zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BernsteinTransform {
    Log1p,
    Power { beta: f64 },
    Scale { s: f64 },
    Rational { lambda: f64 },
}

impl BernsteinTransform {
    pub fn validate(self) -> Result<(), KernelError> {
        const OP: &str = "pcv_bernstein";
        match self {
            Self::Log1p => Ok(()),
            Self::Power { beta } if beta > 0.0 && beta <= 1.0 => Ok(()),
            Self::Power { beta } => Err(KernelError::param(OP, format!("power beta must lie in (0, 1], got {beta}"))),
            Self::Scale { s } => require_positive(OP, "s", s),
            Self::Rational { lambda } => require_positive(OP, "lambda", lambda),
        }
    }

    /// `(f(t), f'(t), f''(t))`.
    pub fn apply(self, t: f64) -> Result<(f64, f64, f64), String> {
        if t < 0.0 && !matches!(self, Self::Scale { .. }) {
            return Err(format!("negative argument {t}"));
        }
        Ok(match self {
            Self::Log1p => (t.ln_1p(), 1.0 / (1.0 + t), -1.0 / ((1.0 + t) * (1.0 + t))),
            Self::Power { beta } => {
                if beta == 1.0 {
                    (t, 1.0, 0.0)
                } else if t == 0.0 {
                    (0.0, f64::INFINITY, f64::NEG_INFINITY)
                } else {
                    (t.powf(beta), beta * t.powf(beta - 1.0), beta * (beta - 1.0) * t.powf(beta - 2.0))
                }
            }
            Self::Scale { s } => (s * t, s, 0.0),
            Self::Rational { lambda } => {
                let d = lambda + t;
                (t / d, lambda / (d * d), -2.0 * lambda / (d * d * d))
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BernsteinPcv {
    pub transform: BernsteinTransform,
    pub child: KernelSpec,
}

pub fn pcv_bernstein(child: &KernelSpec, transform: BernsteinTransform) -> Result<KernelSpec, KernelError> {
    transform.validate()?;
    Ok(KernelSpec::new(BernsteinPcv { transform, child: child.clone() }))
}

impl Component for BernsteinPcv {
    fn op(&self) -> &'static str {
        "pcv_bernstein"
    }
    fn m(&self) -> usize {
        self.child.m()
    }
    fn dim(&self) -> usize {
        self.child.dim()
    }
    fn kind(&self) -> KernelKind {
        let k = self.child.kind();
        KernelKind { positive_definite: false, cross_variogram: false, ..k }
    }
    fn stationary(&self) -> bool {
        self.child.is_stationary()
    }
    fn eval(&self, x: &[f64], y: &[f64]) -> Result<Mat, KernelError> {
        let g = self.child.eval(x, y)?;
        map_entries(&g, |i, j, v| self.transform.apply(v).map(|r| r.0).map_err(|e| KernelError::eval("pcv_bernstein", i, j, e)))
    }
    fn children(&self) -> Vec<&KernelSpec> {
        vec![&self.child]
    }
    fn derivatives(&self, x: &[f64], y: &[f64], axis: usize) -> Option<Result<Derivatives, KernelError>> {
        let d = self.child.derivatives(x, y, axis)?;
        Some(d.and_then(|d| {
            let m = self.m();
            let mut out = Derivatives::constant(Mat::zeros(m, m));
            for i in 0..m {
                for j in 0..m {
                    let (f, f1, f2) = self.transform.apply(d.value[(i, j)]).map_err(|e| KernelError::eval("pcv_bernstein", i, j, e))?;
                    let g1 = d.first[(i, j)];
                    out.value[(i, j)] = f;
                    out.first[(i, j)] = f1 * g1;
                    out.second[(i, j)] = f2 * g1 * g1 + f1 * d.second[(i, j)];
                }
            }
            Ok(out)
        }))
    }
    fn has_derivatives(&self, axis: usize) -> bool {
        self.child.has_derivatives(axis)
    }
    fn radial(&self, t: f64) -> Option<Result<RadialProfile, KernelError>> {
        let r = self.child.radial(t)?;
        Some(r.and_then(|r| {
            let m = self.m();
            let mut out = RadialProfile { value: Mat::zeros(m, m), slope: Mat::zeros(m, m) };
            for i in 0..m {
                for j in 0..m {
                    let (f, f1, _) = self.transform.apply(r.value[(i, j)]).map_err(|e| KernelError::eval("pcv_bernstein", i, j, e))?;
                    out.value[(i, j)] = f;
                    out.slope[(i, j)] = f1 * r.slope[(i, j)];
                }
            }
            Ok(out)
        }))
    }
    fn has_radial(&self) -> bool {
        self.child.has_radial()
    }
}

/// `gamma_ij(h, u) = gamma^S_ij(h) + gamma^T_ij(u)` on `R^d x R^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct NestedSpaceTime {
    pub spatial: KernelSpec,
    pub temporal: KernelSpec,
}

pub fn pcv_nested_spacetime(spatial: &KernelSpec, temporal: &KernelSpec) -> Result<KernelSpec, KernelError> {
    if spatial.m() != temporal.m() {
        return Err(KernelError::shape("pcv_nested_spacetime", format!("m = {} vs {}", spatial.m(), temporal.m())));
    }
    Ok(KernelSpec::new(NestedSpaceTime { spatial: spatial.clone(), temporal: temporal.clone() }))
}

impl Component for NestedSpaceTime {
    fn op(&self) -> &'static str {
        "pcv_nested_spacetime"
    }
    fn m(&self) -> usize {
        self.spatial.m()
    }
    fn dim(&self) -> usize {
        self.spatial.dim() + self.temporal.dim()
    }
    fn kind(&self) -> KernelKind {
        let k = KernelKind::cone([self.spatial.kind(), self.temporal.kind()]);
        KernelKind { positive_definite: false, cross_variogram: false, ..k }
    }
    fn stationary(&self) -> bool {
        self.spatial.is_stationary() && self.temporal.is_stationary()
    }
    fn eval(&self, x: &[f64], y: &[f64]) -> Result<Mat, KernelError> {
        let d = self.spatial.dim();
        Ok(self.spatial.eval(&x[..d], &y[..d])? + self.temporal.eval(&x[d..], &y[d..])?)
    }
    fn children(&self) -> Vec<&KernelSpec> {
        vec![&self.spatial, &self.temporal]
    }
    fn derivatives(&self, x: &[f64], y: &[f64], axis: usize) -> Option<Result<Derivatives, KernelError>> {
        let d = self.spatial.dim();
        let (active, other) = if axis < d {
            (self.spatial.derivatives(&x[..d], &y[..d], axis)?, self.temporal.eval(&x[d..], &y[d..]))
        } else {
            (self.temporal.derivatives(&x[d..], &y[d..], axis - d)?, self.spatial.eval(&x[..d], &y[..d]))
        };
        Some(active.and_then(|a| Ok(Derivatives { value: a.value + other?, ..a })))
    }
    fn has_derivatives(&self, axis: usize) -> bool {
        let d = self.spatial.dim();
        if axis < d {
            self.spatial.has_derivatives(axis)
        } else {
            self.temporal.has_derivatives(axis - d)
        }
    }
}

/// `gamma~_ij(h, u) = gamma_ij(h - v u)` on `R^d x R`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPcv {
    pub spatial: KernelSpec,
    pub velocity: Vec<f64>,
}

pub fn pcv_transport(spatial: &KernelSpec, velocity: Vec<f64>) -> Result<KernelSpec, KernelError> {
    const OP: &str = "pcv_transport";
    if velocity.len() != spatial.dim() {
        return Err(KernelError::shape(OP, format!("velocity has length {}, expected {}", velocity.len(), spatial.dim())));
    }
    crate::kernel::require_finite(OP, "velocity", &velocity)?;
    if !spatial.is_stationary() {
        return Err(KernelError::param(OP, "spatial model must be stationary"));
    }
    Ok(KernelSpec::new(TransportPcv { spatial: spatial.clone(), velocity }))
}

impl TransportPcv {
    fn moved(&self, x: &[f64]) -> Vec<f64> {
        let d = self.velocity.len();
        let t = x[d];
        x[..d].iter().zip(&self.velocity).map(|(a, v)| a - v * t).collect()
    }
}

impl Component for TransportPcv {
    fn op(&self) -> &'static str {
        "pcv_transport"
    }
    fn m(&self) -> usize {
        self.spatial.m()
    }
    fn dim(&self) -> usize {
        self.spatial.dim() + 1
    }
    fn kind(&self) -> KernelKind {
        KernelKind { cross_variogram: false, ..self.spatial.kind() }
    }
    fn stationary(&self) -> bool {
        true
    }
    fn eval(&self, x: &[f64], y: &[f64]) -> Result<Mat, KernelError> {
        self.spatial.eval(&self.moved(x), &self.moved(y))
    }
    fn children(&self) -> Vec<&KernelSpec> {
        vec![&self.spatial]
    }
    fn derivatives(&self, x: &[f64], y: &[f64], axis: usize) -> Option<Result<Derivatives, KernelError>> {
        if axis >= self.velocity.len() {
            return None;
        }
        self.spatial.derivatives(&self.moved(x), &self.moved(y), axis)
    }
    fn has_derivatives(&self, axis: usize) -> bool {
        axis < self.velocity.len() && self.spatial.has_derivatives(axis)
    }
}

/// A negative entry found by [`negative_entries`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegativeEntry {
    pub point_i: usize,
    pub point_j: usize,
    pub p: usize,
    pub q: usize,
    pub value: f64,
}

/// Most negative entry of `spec` over all pairs of `pts`, if any entry is below `-tol`.
pub fn negative_entries(spec: &KernelSpec, pts: &PointSet, tol: f64) -> Result<Option<NegativeEntry>, KernelError> {
    let mut worst: Option<NegativeEntry> = None;
    for i in 0..pts.len() {
        for j in 0..pts.len() {
            let v = spec.evaluate(pts.point(i), pts.point(j))?;
            for p in 0..spec.m() {
                for q in 0..spec.m() {
                    let value = v[(p, q)];
                    if value < -tol && worst.as_ref().is_none_or(|w| value < w.value) {
                        worst = Some(NegativeEntry { point_i: i, point_j: j, p, q, value });
                    }
                }
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{constant, covariance, CovShape};

    fn at1(k: &KernelSpec, x: f64, y: f64) -> Mat {
        k.evaluate(&[x], &[y]).unwrap()
    }

    #[test]
    fn power_examples() {
        let g = pcv_power(1, 2, 2.0, 1.0, None).unwrap();
        assert_eq!(g.evaluate(&[0.6, 0.8], &[0.0, 0.0]).unwrap()[(0, 0)], 1.0);
        let g1 = pcv_power(2, 1, 1.0, 1.0, None).unwrap();
        assert_eq!(at1(&g1, 0.3, 0.3), Mat::zeros(2, 2));
        assert!(pcv_power(1, 1, 2.5, 1.0, None).is_err());
        assert!(power_law(1, 1, 2.5, 1.0, None).unwrap().kind().is_unvalidated());
    }

    #[test]
    fn non_constant_sill_is_only_cross_variogram() {
        let b = SymMatrix::from_rows(&[vec![1.0, 0.5], vec![0.5, 2.0]]).unwrap();
        let k = pcv_power(2, 1, 1.0, 1.0, Some(b)).unwrap().kind();
        assert!(!k.is_pcv());
        assert!(k.cross_variogram);
    }

    #[test]
    fn g_minus_c_examples() {
        let ones = constant(2, 1, 1.0).unwrap();
        let g = pcv_from_g_and_c(vec![ScalarField::constant(0.0); 2], &ones).unwrap();
        assert_eq!(at1(&g, 0.0, 1.0), Mat::from_element(2, 2, -1.0));
        assert!(g.kind().is_cnd() && !g.kind().is_pcv());

        let e = covariance(1, 1, CovShape::Exponential, 1.0, None).unwrap();
        let g = pcv_from_g_and_c(vec![ScalarField::constant(0.5)], &e).unwrap();
        assert!(g.kind().is_pcv());
        assert_eq!(at1(&g, 0.4, 0.4)[(0, 0)], 0.0);
        assert!((at1(&g, 0.0, 1.3)[(0, 0)] - (1.0 - (-1.3f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn cross_variogram_identity_for_univariate() {
        let g = pcv_power(1, 1, 1.5, 1.0, None).unwrap();
        let p = pcv_from_cross_variogram(&g).unwrap();
        for &(x, y) in &[(0.3, -1.2), (2.0, 0.5), (0.0, 0.0)] {
            assert!((at1(&p, x, y)[(0, 0)] - at1(&g, x, y)[(0, 0)]).abs() < 1e-14);
        }
        assert_eq!(at1(&p, 0.0, 0.0), Mat::zeros(1, 1));
    }

    #[test]
    fn oesting_examples() {
        let rho = SymMatrix::from_rows(&[vec![1.0, 0.6], vec![0.6, 1.0]]).unwrap();
        let c = covariance(2, 1, CovShape::Exponential, 1.0, Some(rho)).unwrap();
        let zero = constant(1, 1, 0.0).unwrap();
        let o = pcv_oesting(&zero, &c).unwrap();
        assert!((at1(&o, 0.0, 0.7)[(0, 0)] - (1.0 - (-0.7f64).exp())).abs() < 1e-15);
        let lin = pcv_power(1, 1, 1.0, 1.0, None).unwrap();
        let o = pcv_oesting(&lin, &c).unwrap();
        assert!(o.kind().is_pcv());
        assert!((at1(&o, 0.0, 0.0)[(0, 1)] - 0.4).abs() < 1e-15);
    }

    #[test]
    fn delay_examples() {
        let g0 = pcv_power(1, 1, 1.0, 1.0, None).unwrap();
        let same = pcv_delay(&g0, vec![vec![0.3], vec![0.3]]).unwrap();
        assert!(at1(&same, 0.2, 1.0).iter().all(|&v| (v - 0.8).abs() < 1e-15));
        let d = pcv_delay(&g0, vec![vec![0.0], vec![0.5]]).unwrap();
        assert_eq!(at1(&d, 0.0, 0.0)[(0, 1)], 0.5);
        let a = at1(&d, 0.3, 0.0);
        let b = at1(&d, 0.0, 0.3);
        assert_eq!(a[(0, 1)], b[(1, 0)]);
        assert!(pcv_delay(&g0, vec![vec![0.0, 1.0]]).is_err());
    }

    #[test]
    fn bernstein_examples() {
        let zero = constant(2, 1, 0.0).unwrap();
        let z = pcv_bernstein(&zero, BernsteinTransform::Log1p).unwrap();
        assert_eq!(at1(&z, 0.0, 3.0), Mat::zeros(2, 2));
        assert!(z.kind().is_pcv());
        let g = pcv_power(1, 1, 1.0, 1.0, None).unwrap();
        let p = pcv_bernstein(&g, BernsteinTransform::Power { beta: 1.0 }).unwrap();
        assert_eq!(at1(&p, 0.0, 1.7), at1(&g, 0.0, 1.7));
        assert!(pcv_bernstein(&g, BernsteinTransform::Power { beta: 1.5 }).is_err());
    }

    #[test]
    fn nested_and_transport() {
        let s = pcv_power(1, 2, 1.0, 1.0, None).unwrap();
        let t = constant(1, 1, 0.0).unwrap();
        let n = pcv_nested_spacetime(&s, &t).unwrap();
        assert!(n.kind().is_pcv());
        assert_eq!(n.evaluate(&[0.0, 0.0, 5.0], &[0.6, 0.8, 1.0]).unwrap()[(0, 0)], 1.0);

        let tr = pcv_transport(&s, vec![1.0, -0.5]).unwrap();
        let v = tr.evaluate(&[1.0, -0.5, 1.0], &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(v[(0, 0)], 0.0);
        let still = pcv_transport(&s, vec![0.0, 0.0]).unwrap();
        assert_eq!(still.evaluate(&[0.1, 0.2, 7.0], &[0.1, 0.2, -3.0]).unwrap()[(0, 0)], 0.0);
    }

    #[test]
    fn closed_derivatives_match_calculus() {
        let g = pcv_shape(1, 1, VariogramShape::Gaussian, 1.0, None).unwrap();
        let d = g.derivatives(&[0.7], &[0.0], 0).unwrap().unwrap();
        let h: f64 = 0.7;
        assert!((d.second[(0, 0)] - (2.0 - 4.0 * h * h) * (-h * h).exp()).abs() < 1e-14);
        let q = pcv_power(1, 1, 2.0, 1.0, None).unwrap();
        assert_eq!(q.derivatives(&[0.3], &[0.0], 0).unwrap().unwrap().second[(0, 0)], 2.0);
        assert!(pcv_power(1, 1, 1.0, 1.0, None).unwrap().derivatives(&[0.3], &[0.0], 0).is_none());
    }
}
