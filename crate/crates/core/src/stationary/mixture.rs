//! Space-time covariances as two-dimensional Laplace mixtures of
//! `exp(-v gamma^S - w gamma^T)`.

use serde::{Deserialize, Serialize};

use super::laplace::{LaplaceTransform, TransformError};
use super::SpaceTimePair;
use crate::error::KernelError;
use crate::kernel::{map_entries, require_positive, Component, KernelKind, KernelSpec, Mat};
use crate::linalg::{min_eigenvalue, SymMatrix};
use crate::quadrature::gauss_legendre;
use crate::special::{bessel_k_ln, exp_integral_ei, log_gamma, SpecialError};

/// Relative PSD tolerance for density matrices at quadrature nodes.
const NODE_PSD_TOL: f64 = 1e-10;

/// PSD matrix weight at `(v, w)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureNode2d {
    pub v: f64,
    pub w: f64,
    pub weight: SymMatrix,
}

/// Density matrices `f_ij(v, w)` that can be integrated by quadrature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Density2d {
    /// Hessian of the convex function `v^2 / w`; `m = 2`, singular PSD.
    ConvexHessian,
    /// `sill_ij exp(-rate_v v - rate_w w)`.
    Separable { sill: SymMatrix, rate_v: f64, rate_w: f64 },
}

impl Density2d {
    fn order(&self) -> usize {
        match self {
            Self::ConvexHessian => 2,
            Self::Separable { sill, .. } => sill.order(),
        }
    }

    fn at(&self, v: f64, w: f64) -> Mat {
        match self {
            Self::ConvexHessian => Mat::from_row_slice(2, 2, &[2.0 / w, -2.0 * v / (w * w), -2.0 * v / (w * w), 2.0 * v * v / (w * w * w)]),
            Self::Separable { sill, rate_v, rate_w } => sill.as_matrix() * (-rate_v * v - rate_w * w).exp(),
        }
    }
}

/// Mixing measure of a [`Laplace2dMixture`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Mixture2d {
    Nodes {
        nodes: Vec<MixtureNode2d>,
    },
    /// Tensor Gauss-Legendre rule of `order` points per axis on a box in `[0, inf)^2`.
    Density {
        density: Density2d,
        v_range: [f64; 2],
        w_range: [f64; 2],
        order: usize,
    },
}

/// `(v, w, matrix weight)` after quadrature expansion.
type Expanded = Vec<(f64, f64, Mat)>;

impl Mixture2d {
    fn order(&self) -> Option<usize> {
        match self {
            Self::Nodes { nodes } => nodes.first().map(|n| n.weight.order()),
            Self::Density { density, .. } => Some(density.order()),
        }
    }

    fn expand(&self, op: &'static str, order_scale: usize) -> Result<Expanded, KernelError> {
        match self {
            Self::Nodes { nodes } => {
                if nodes.is_empty() {
                    return Err(KernelError::param(op, "mixture needs at least one node"));
                }
                let m = nodes[0].weight.order();
                nodes
                    .iter()
                    .enumerate()
                    .map(|(k, n)| {
                        check_node(op, k, n.v, n.w)?;
                        if n.weight.order() != m {
                            return Err(KernelError::shape(op, format!("node {k}: weight has order {}, expected {m}", n.weight.order())));
                        }
                        check_psd_node(op, k, n.v, n.w, n.weight.as_matrix())?;
                        Ok((n.v, n.w, n.weight.as_matrix().clone()))
                    })
                    .collect()
            }
            Self::Density { density, v_range, w_range, order } => {
                for (name, r) in [("v_range", v_range), ("w_range", w_range)] {
                    if !(r[0] >= 0.0) || !(r[1] > r[0]) || !r[1].is_finite() {
                        return Err(KernelError::param(op, format!("{name} must satisfy 0 <= lo < hi < inf, got {r:?}")));
                    }
                }
                if *order == 0 {
                    return Err(KernelError::param(op, "quadrature order must be positive"));
                }
                let n = order * order_scale;
                let rv = gauss_legendre(n, v_range[0], v_range[1]);
                let rw = gauss_legendre(n, w_range[0], w_range[1]);
                let mut out = Vec::with_capacity(n * n);
                for &(v, wv) in &rv {
                    for &(w, ww) in &rw {
                        let f = density.at(v, w);
                        check_psd_node(op, out.len(), v, w, &f)?;
                        out.push((v, w, f * (wv * ww)));
                    }
                }
                Ok(out)
            }
        }
    }
}

fn check_node(op: &'static str, k: usize, v: f64, w: f64) -> Result<(), KernelError> {
    if !(v >= 0.0 && w >= 0.0) || !v.is_finite() || !w.is_finite() {
        return Err(KernelError::param(op, format!("node {k} at ({v}, {w}) is outside [0, inf)^2")));
    }
    Ok(())
}

fn check_psd_node(op: &'static str, k: usize, v: f64, w: f64, f: &Mat) -> Result<(), KernelError> {
    let sym = SymMatrix::new(f.clone()).map_err(|e| KernelError::param(op, format!("node {k}: {e}")))?;
    let r = min_eigenvalue(&sym).map_err(|e| KernelError::param(op, format!("node {k}: {e}")))?;
    if r.min_eigenvalue < -NODE_PSD_TOL * r.max_abs_eigenvalue {
        return Err(KernelError::param(
            op,
            format!("density matrix at node {k} (v = {v}, w = {w}) is not PSD: min eigenvalue {:.3e}", r.min_eigenvalue),
        ));
    }
    Ok(())
}

fn mix(nodes: &Expanded, gs: &Mat, gt: &Mat) -> Mat {
    let m = gs.nrows();
    Mat::from_fn(m, m, |i, j| nodes.iter().map(|(v, w, f)| f[(i, j)] * (-v * gs[(i, j)] - w * gt[(i, j)]).exp()).sum())
}

/// `C_ij(h, u) = int int exp(-v gamma^S_ij(h) - w gamma^T_ij(u)) f_ij(v, w) dv dw`.
#[derive(Debug, Clone, PartialEq)]
pub struct Laplace2dMixture {
    pub pair: SpaceTimePair,
    pub mixture: Mixture2d,
    nodes: Expanded,
}

pub fn laplace2d_mixture(gs: &KernelSpec, gt: &KernelSpec, mixture: Mixture2d) -> Result<KernelSpec, KernelError> {
    const OP: &str = "laplace2d_mixture";
    let pair = SpaceTimePair::new(OP, gs, gt)?;
    if let Some(order) = mixture.order() {
        if order != pair.m() {
            return Err(KernelError::shape(OP, format!("mixture has order {order}, variograms have m = {}", pair.m())));
        }
    }
    let nodes = mixture.expand(OP, 1)?;
    Ok(KernelSpec::new(Laplace2dMixture { pair, mixture, nodes }))
}

impl Laplace2dMixture {
    /// Maximum relative change of `C(x, y)` when the per-axis quadrature
    /// order is doubled; zero for explicit node lists.
    pub fn node_doubling_error(&self, x: &[f64], y: &[f64]) -> Result<f64, KernelError> {
        if matches!(self.mixture, Mixture2d::Nodes { .. }) {
            return Ok(0.0);
        }
        let fine = self.mixture.expand(self.op(), 2)?;
        let (gs, gt) = self.pair.eval(x, y)?;
        let a = mix(&self.nodes, &gs, &gt);
        let b = mix(&fine, &gs, &gt);
        let scale = b.amax().max(f64::MIN_POSITIVE);
        Ok((a - b).amax() / scale)
    }
}

impl Component for Laplace2dMixture {
    fn op(&self) -> &'static str {
        "laplace2d_mixture"
    }
    fn m(&self) -> usize {
        self.pair.m()
    }
    fn dim(&self) -> usize {
        self.pair.dim()
    }
    fn kind(&self) -> KernelKind {
        KernelKind::pd_if(self.pair.cnd())
    }
    fn stationary(&self) -> bool {
        self.pair.stationary()
    }
    fn eval(&self, x: &[f64], y: &[f64]) -> Result<Mat, KernelError> {
        let (gs, gt) = self.pair.eval(x, y)?;
        Ok(mix(&self.nodes, &gs, &gt))
    }
    fn children(&self) -> Vec<&KernelSpec> {
        self.pair.children()
    }
    fn caveats(&self) -> Vec<String> {
        vec!["density matrices are certified PSD at quadrature nodes only".into()]
    }
}

/// Below this magnitude the toy model switches to power series.
const TOY_SERIES_SWITCH: f64 = 0.5;

/// `int_1^2 v^k e^{-v x} dv` for `k = 0, 1, 2`.
fn v_moment(k: u32, x: f64) -> f64 {
    if x.abs() <= TOY_SERIES_SWITCH {
        let mut sum = 0.0;
        let mut pow = 1.0;
        for n in 0..60 {
            let p = (k + n + 1) as i32;
            let term = pow * ((2f64).powi(p) - 1.0) / p as f64;
            sum += term;
            if term.abs() < 1e-17 * sum.abs() {
                break;
            }
            pow *= -x / (n + 1) as f64;
        }
        return sum;
    }
    let (e1, e2) = ((-x).exp(), (-2.0 * x).exp());
    match k {
        0 => -e1 * (-x).exp_m1() / x,
        1 => (e1 * (x + 1.0) - e2 * (2.0 * x + 1.0)) / (x * x),
        _ => (e1 * (x * x + 2.0 * x + 2.0) - e2 * (4.0 * x * x + 4.0 * x + 2.0)) / (x * x * x),
    }
}

/// `int_1^2 w^{-p} e^{-w y} dw` for `p = 1, 2, 3`.
fn w_moment(p: u32, y: f64) -> Result<f64, SpecialError> {
    if y.abs() <= TOY_SERIES_SWITCH {
        let mut sum = 0.0;
        let mut pow = 1.0;
        for n in 0..60u32 {
            let e = n as i32 - p as i32 + 1;
            let integral = if e == 0 { std::f64::consts::LN_2 } else { ((2f64).powi(e) - 1.0) / e as f64 };
            let term = pow * integral;
            sum += term;
            if n > p && term.abs() < 1e-17 * sum.abs() {
                break;
            }
            pow *= -y / (n + 1) as f64;
        }
        return Ok(sum);
    }
    let w1 = exp_integral_ei(-2.0 * y)? - exp_integral_ei(-y)?;
    let w2 = (-y).exp() - 0.5 * (-2.0 * y).exp() - y * w1;
    Ok(match p {
        1 => w1,
        2 => w2,
        _ => 0.5 * (-y).exp() - 0.125 * (-2.0 * y).exp() - 0.5 * y * w2,
    })
}

/// Entry `(i, j)` of the closed-form transform of the Hessian density of
/// `v^2 / w` on `(1, 2)^2`.
pub fn toy_ei_laplace(i: usize, j: usize, x: f64, y: f64) -> Result<f64, SpecialError> {
    Ok(match (i, j) {
        (0, 0) => 2.0 * v_moment(0, x) * w_moment(1, y)?,
        (1, 1) => 2.0 * v_moment(2, x) * w_moment(3, y)?,
        _ => -2.0 * v_moment(1, x) * w_moment(2, y)?,
    })
}

/// Bivariate model `C_ij = L_ij(gamma^S_ij, gamma^T_ij)` with closed-form
/// exponential-integral transforms.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyEi {
    pub pair: SpaceTimePair,
}

pub fn toy_ei_model(gs: &KernelSpec, gt: &KernelSpec) -> Result<KernelSpec, KernelError> {
    const OP: &str = "toy_ei_model";
    let pair = SpaceTimePair::new(OP, gs, gt)?;
    if pair.m() != 2 {
        return Err(KernelError::shape(OP, format!("requires m = 2, got {}", pair.m())));
    }
    Ok(KernelSpec::new(ToyEi { pair }))
}

impl Component for ToyEi {
    fn op(&self) -> &'static str {
        "toy_ei_model"
    }
    fn m(&self) -> usize {
        2
    }
    fn dim(&self) -> usize {
        self.pair.dim()
    }
    fn kind(&self) -> KernelKind {
        KernelKind::pd_if(self.pair.cnd())
    }
    fn stationary(&self) -> bool {
        self.pair.stationary()
    }
    fn eval(&self, x: &[f64], y: &[f64]) -> Result<Mat, KernelError> {
        let (gs, gt) = self.pair.eval(x, y)?;
        map_entries(&gs, |i, j, a| toy_ei_laplace(i, j, a, gt[(i, j)]).map_err(KernelError::special(self.op(), i, j)))
    }
    fn children(&self) -> Vec<&KernelSpec> {
        self.pair.children()
    }
}

fn transform_err(op: &'static str, i: usize, j: usize) -> impl Fn(TransformError) -> KernelError {
    move |e| match e {
        TransformError::Special(s) => KernelError::Special { op, i, j, source: s },
        other => KernelError::eval(op, i, j, other.to_string()),
    }
}

/// `C_ij = L0(gamma^S_ij + gamma^T_ij) L1(gamma^S_ij) L2(gamma^T_ij)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TripleLaplace {
    pub pair: SpaceTimePair,
    pub l0: LaplaceTransform,
    pub l1: LaplaceTransform,
    pub l2: LaplaceTransform,
}

pub fn triple_laplace(
    gs: &KernelSpec,
    gt: &KernelSpec,
    l0: LaplaceTransform,
    l1: LaplaceTransform,
    l2: LaplaceTransform,
) -> Result<KernelSpec, KernelError> {
    const OP: &str = "triple_laplace";
    let pair = SpaceTimePair::new(OP, gs, gt)?;
    for l in [&l0, &l1, &l2] {
        l.validate(OP)?;
    }
    Ok(KernelSpec::new(TripleLaplace { pair, l0, l1, l2 }))
}

impl Component for TripleLaplace {
    fn op(&self) -> &'static str {
        "triple_laplace"
    }
    fn m(&self) -> usize {
        self.pair.m()
    }
    fn dim(&self) -> usize {
        self.pair.dim()
    }
    fn kind(&self) -> KernelKind {
        KernelKind::pd_if(self.pair.cnd())
    }
    fn stationary(&self) -> bool {
        self.pair.stationary()
    }
    fn eval(&self, x: &[f64], y: &[f64]) -> Result<Mat, KernelError> {
        let (gs, gt) = self.pair.eval(x, y)?;
        map_entries(&gs, |i, j, a| {
            let b = gt[(i, j)];
            let err = transform_err(self.op(), i, j);
            Ok(self.l0.value(a + b).map_err(&err)? * self.l1.value(a).map_err(&err)? * self.l2.value(b).map_err(&err)?)
        })
    }
    fn children(&self) -> Vec<&KernelSpec> {
        self.pair.children()
    }
}

/// Parameters of the Bessel-ratio space-time family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FonsecaParams {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub lambda0: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub delta: f64,
}

impl FonsecaParams {
    fn validate(&self) -> Result<(), KernelError> {
        const OP: &str = "fonseca_steel";
        for (name, v) in [
            ("a0", self.a0),
            ("a1", self.a1),
            ("a2", self.a2),
            ("lambda0", self.lambda0),
            ("lambda1", self.lambda1),
            ("lambda2", self.lambda2),
            ("delta", self.delta),
        ] {
            require_positive(OP, name, v)?;
        }
        Ok(())
    }

    /// The equivalent `(L0, L1, L2)`: Gamma, generalized inverse Gaussian, Gamma.
    pub fn as_transforms(&self) -> [LaplaceTransform; 3] {
        [
            LaplaceTransform::Gamma { shape: self.lambda0, rate: self.a0 },
            LaplaceTransform::Gig { lambda: self.lambda1, chi: 2.0 * self.delta, psi: 2.0 * self.a1 },
            LaplaceTransform::Gamma { shape: self.lambda2, rate: self.a2 },
        ]
    }

    fn entry(&self, a: f64, b: f64) -> Result<f64, String> {
        if !(a > -self.a1) || !(b > -self.a2) || !(a + b > -self.a0) {
            return Err(format!("variogram values ({a}, {b}) outside the transform domain"));
        }
        let bessel = |x: f64| bessel_k_ln(self.lambda1, x).map_err(|e| e.to_string());
        let log = -self.lambda0 * ((a + b) / self.a0).ln_1p() - 0.5 * self.lambda1 * (a / self.a1).ln_1p() - self.lambda2 * (b / self.a2).ln_1p()
            + bessel(2.0 * ((self.a1 + a) * self.delta).sqrt())?
            - bessel(2.0 * (self.a1 * self.delta).sqrt())?;
        Ok(log.exp())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FonsecaSteel {
    pub pair: SpaceTimePair,
    pub params: FonsecaParams,
}

pub fn fonseca_steel(gs: &KernelSpec, gt: &KernelSpec, params: FonsecaParams) -> Result<KernelSpec, KernelError> {
    let pair = SpaceTimePair::new("fonseca_steel", gs, gt)?;
    params.validate()?;
    Ok(KernelSpec::new(FonsecaSteel { pair, params }))
}

impl Component for FonsecaSteel {
    fn op(&self) -> &'static str {
        "fonseca_steel"
    }
    fn m(&self) -> usize {
        self.pair.m()
    }
    fn dim(&self) -> usize {
        self.pair.dim()
    }
    fn kind(&self) -> KernelKind {
        KernelKind::pd_if(self.pair.cnd())
    }
    fn stationary(&self) -> bool {
        self.pair.stationary()
    }
    fn eval(&self, x: &[f64], y: &[f64]) -> Result<Mat, KernelError> {
        let (gs, gt) = self.pair.eval(x, y)?;
        map_entries(&gs, |i, j, a| self.params.entry(a, gt[(i, j)]).map_err(|e| KernelError::eval(self.op(), i, j, e)))
    }
    fn children(&self) -> Vec<&KernelSpec> {
        self.pair.children()
    }
}

/// Which formula [`matern_mixture_entry`] uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaternBranch {
    /// Bessel form for `gamma^S > 0`, limit at exactly zero.
    Auto,
    Bessel,
    Limit,
}

/// `(a / (1 + b))^{nu/2} K_nu(sqrt(a (1 + b)))` with its `a -> 0` limit
/// `2^{nu-1} Gamma(nu) (1 + b)^{-nu}`.
pub fn matern_mixture_entry(nu: f64, a: f64, b: f64, branch: MaternBranch) -> Result<f64, String> {
    if !(a >= 0.0) || !(b > -1.0) {
        return Err(format!("needs gamma^S >= 0 and gamma^T > -1, got ({a}, {b})"));
    }
    let lb = b.ln_1p();
    let limit = || -> Result<f64, String> {
        let lg = log_gamma(nu).map_err(|e| e.to_string())?;
        Ok(((nu - 1.0) * std::f64::consts::LN_2 + lg - nu * lb).exp())
    };
    match branch {
        MaternBranch::Limit => limit(),
        MaternBranch::Auto if a == 0.0 => limit(),
        _ => {
            if a == 0.0 {
                return Err("Bessel branch is singular at gamma^S = 0".into());
            }
            let k = bessel_k_ln(nu, (a * (1.0 + b)).sqrt()).map_err(|e| e.to_string())?;
            Ok((0.5 * nu * (a.ln() - lb) + k).exp())
        }
    }
}

/// Space-time mixture with `nu_ij = (nu_ii + nu_jj) / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaternMixture {
    pub pair: SpaceTimePair,
    pub nu: Vec<f64>,
}

pub fn matern_mixture(gs: &KernelSpec, gt: &KernelSpec, nu: Vec<f64>) -> Result<KernelSpec, KernelError> {
    const OP: &str = "matern_mixture";
    let pair = SpaceTimePair::new(OP, gs, gt)?;
    if nu.len() != pair.m() {
        return Err(KernelError::shape(OP, format!("{} smoothness values for m = {}", nu.len(), pair.m())));
    }
    for v in &nu {
        require_positive(OP, "nu", *v)?;
    }
    Ok(KernelSpec::new(MaternMixture { pair, nu }))
}

impl MaternMixture {
    pub fn nu_ij(&self, i: usize, j: usize) -> f64 {
        0.5 * (self.nu[i] + self.nu[j])
    }
}

impl Component for MaternMixture {
    fn op(&self) -> &'static str {
        "matern_mixture"
    }
    fn m(&self) -> usize {
        self.pair.m()
    }
    fn dim(&self) -> usize {
        self.pair.dim()
    }
    fn kind(&self) -> KernelKind {
        KernelKind::pd_if(self.pair.pcv())
    }
    fn stationary(&self) -> bool {
        self.pair.stationary()
    }
    fn eval(&self, x: &[f64], y: &[f64]) -> Result<Mat, KernelError> {
        let (gs, gt) = self.pair.eval(x, y)?;
        map_entries(&gs, |i, j, a| {
            matern_mixture_entry(self.nu_ij(i, j), a, gt[(i, j)], MaternBranch::Auto).map_err(|e| KernelError::eval(self.op(), i, j, e))
        })
    }
    fn children(&self) -> Vec<&KernelSpec> {
        self.pair.children()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::constant;
    use crate::pcv::{pcv_nested_spacetime, pcv_power};
    use crate::quadrature::integrate;
    use crate::stationary::schoenberg_exp;

    // Independent oracle values from high-order composite quadrature.
    #[allow(clippy::excessive_precision)]
    const TOY: [((f64, f64), [f64; 3]); 3] = [
        ((1.0, 1.0), [0.0792898484064939526, -0.0855566507205333194, 0.0993072470947807096]),
        ((0.3, 2.5), [0.0304223198065030130, -0.0364395723141799, 0.0464791608467896]),
        ((3.0, 0.7), [0.00812282308763972648, -0.00779715855951160102, 0.00802271271720187]),
    ];

    fn quad2(f: impl Fn(f64, f64) -> f64) -> f64 {
        integrate(|v| integrate(|w| f(v, w), 1.0, 2.0, 20, 4), 1.0, 2.0, 20, 4)
    }

    #[test]
    fn toy_closed_forms_match_frozen_oracle() {
        for ((x, y), want) in TOY {
            for (k, (i, j)) in [(0, 0), (0, 1), (1, 1)].into_iter().enumerate() {
                let got = toy_ei_laplace(i, j, x, y).unwrap();
                assert!((got - want[k]).abs() < 1e-12 * want[k].abs(), "({x},{y}) [{i}{j}]: {got} vs {}", want[k]);
            }
        }
    }

    #[test]
    fn toy_series_branch_is_continuous() {
        for (x, y) in [(0.5, 1.3), (1.7, 0.5), (-0.4, 0.2), (0.0, 0.0), (1e-9, 3.0)] {
            for (i, j) in [(0, 0), (0, 1), (1, 1)] {
                let got = toy_ei_laplace(i, j, x, y).unwrap();
                let want = quad2(|v, w| {
                    let f = match (i, j) {
                        (0, 0) => 2.0 / w,
                        (1, 1) => 2.0 * v * v / (w * w * w),
                        _ => -2.0 * v / (w * w),
                    };
                    f * (-v * x - w * y).exp()
                });
                assert!((got - want).abs() < 1e-12 * want.abs(), "({x},{y}) [{i}{j}]: {got} vs {want}");
            }
        }
        let limit = 2.0 * (exp_integral_ei(-2.0).unwrap() - exp_integral_ei(-1.0).unwrap());
        assert!((toy_ei_laplace(0, 0, 0.0, 1.0).unwrap() - limit).abs() < 1e-14);
    }

    #[test]
    fn hessian_density_quadrature_matches_closed_form() {
        let g = pcv_power(2, 1, 1.0, 1.0, None).unwrap();
        let mixture = Mixture2d::Density { density: Density2d::ConvexHessian, v_range: [1.0, 2.0], w_range: [1.0, 2.0], order: 12 };
        let quad = laplace2d_mixture(&g, &g, mixture).unwrap();
        let toy = toy_ei_model(&g, &g).unwrap();
        let (x, y) = ([0.0, 0.0], [0.7, 1.9]);
        let a = quad.evaluate(&x, &y).unwrap();
        let b = toy.evaluate(&x, &y).unwrap();
        assert!((a - b).amax() < 1e-12);
        let Node::Laplace2d(l) = quad.node() else { unreachable!() };
        assert!(l.node_doubling_error(&x, &y).unwrap() < 1e-12);
    }

    use crate::kernel::Node;

    #[test]
    fn single_node_is_schoenberg_of_nested_model() {
        let gs = pcv_power(2, 2, 1.0, 1.0, None).unwrap();
        let gt = pcv_power(2, 1, 1.5, 2.0, None).unwrap();
        let ones = SymMatrix::from_fn(2, |_, _| 1.0).unwrap();
        let mixture = Mixture2d::Nodes { nodes: vec![MixtureNode2d { v: 1.0, w: 1.0, weight: ones }] };
        let c = laplace2d_mixture(&gs, &gt, mixture).unwrap();
        let s = schoenberg_exp(&pcv_nested_spacetime(&gs, &gt).unwrap(), 1.0).unwrap();
        let (x, y) = ([0.1, 0.2, 0.3], [1.0, -0.5, 2.0]);
        assert!((c.evaluate(&x, &y).unwrap() - s.evaluate(&x, &y).unwrap()).amax() < 1e-15);
    }

    #[test]
    fn indefinite_node_is_named() {
        let g = pcv_power(2, 1, 1.0, 1.0, None).unwrap();
        let good = SymMatrix::identity(2).unwrap();
        let bad = SymMatrix::from_rows(&[vec![1.0, 3.0], vec![3.0, 1.0]]).unwrap();
        let mixture = Mixture2d::Nodes { nodes: vec![MixtureNode2d { v: 1.0, w: 1.0, weight: good }, MixtureNode2d { v: 0.5, w: 2.0, weight: bad }] };
        let err = laplace2d_mixture(&g, &g, mixture).unwrap_err().to_string();
        assert!(err.contains("node 1") && err.contains("v = 0.5"), "{err}");
    }

    #[test]
    fn zero_variograms_give_total_mass() {
        let z = constant(2, 1, 0.0).unwrap();
        let sill = SymMatrix::from_rows(&[vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let mixture = Mixture2d::Density {
            density: Density2d::Separable { sill: sill.clone(), rate_v: 1.0, rate_w: 2.0 },
            v_range: [0.0, 1.0],
            w_range: [0.0, 1.0],
            order: 10,
        };
        let c = laplace2d_mixture(&z, &z, mixture).unwrap();
        let mass = (1.0 - (-1.0f64).exp()) * (1.0 - (-2.0f64).exp()) / 2.0;
        let v = c.evaluate(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert!((v - sill.as_matrix() * mass).amax() < 1e-14);
    }

    #[test]
    fn gamma_one_triple_is_rational() {
        let gs = pcv_power(1, 1, 1.0, 1.0, None).unwrap();
        let gt = pcv_power(1, 1, 2.0, 1.0, None).unwrap();
        let one = LaplaceTransform::PointMass { at: 0.0 };
        let c = triple_laplace(&gs, &gt, LaplaceTransform::Gamma { shape: 1.0, rate: 2.0 }, one, one).unwrap();
        let v = c.evaluate(&[0.0, 0.0], &[0.5, 1.5]).unwrap()[(0, 0)];
        assert!((v - 1.0 / (1.0 + (0.5 + 2.25) / 2.0)).abs() < 1e-15);
        assert_eq!(c.evaluate(&[0.3, 0.3], &[0.3, 0.3]).unwrap()[(0, 0)], 1.0);
    }

    #[test]
    fn fonseca_equals_triple() {
        let gs = pcv_power(2, 2, 1.0, 1.0, None).unwrap();
        let gt = pcv_power(2, 1, 1.0, 1.0, None).unwrap();
        let p = FonsecaParams { a0: 1.5, a1: 0.7, a2: 2.0, lambda0: 0.8, lambda1: 1.3, lambda2: 0.5, delta: 0.9 };
        let f = fonseca_steel(&gs, &gt, p).unwrap();
        let [l0, l1, l2] = p.as_transforms();
        let t = triple_laplace(&gs, &gt, l0, l1, l2).unwrap();
        let (x, y) = ([0.0, 0.0, 0.0], [0.4, 1.1, 2.3]);
        let (a, b) = (f.evaluate(&x, &y).unwrap(), t.evaluate(&x, &y).unwrap());
        assert!(((a.clone() - b).amax() / a.amax()) < 1e-13);
        assert!((f.evaluate(&x, &x).unwrap()[(0, 0)] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn matern_mixture_spot_values() {
        let v = matern_mixture_entry(0.5, 1.0, 0.0, MaternBranch::Auto).unwrap();
        let k_half = (std::f64::consts::PI / 2.0).sqrt() * (-1.0f64).exp();
        assert!((v - k_half).abs() < 1e-14);
        for nu in [1.0, 1.5, 2.0, 3.5] {
            let l = matern_mixture_entry(nu, 0.0, 0.4, MaternBranch::Auto).unwrap();
            let b = matern_mixture_entry(nu, 1e-10, 0.4, MaternBranch::Bessel).unwrap();
            assert!(((l - b) / l).abs() < 1e-6, "nu={nu}: {l} vs {b}");
        }
        assert!(matern_mixture_entry(1.0, -0.1, 0.0, MaternBranch::Auto).is_err());
    }
}
