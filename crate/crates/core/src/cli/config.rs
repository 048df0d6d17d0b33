//! JSON model configs: `{"m", "dim_space", "dim_time", "model"}` where the
//! model is a tree of `{"op", "params", "children"}` nodes.
//!
//! Leaves take `m` and `dim` from the enclosing context unless they set them
//! explicitly. Space-time constructions give their first child the spatial
//! dimension and their second child the temporal one.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::error::KernelError;
use crate::kernel::{self, CovShape, KernelSpec, ScalarField};
use crate::linalg::SymMatrix;
use crate::nonstationary::{self as ns, LocalAnisotropyField, QuadNode};
use crate::pcv::{self, BernsteinTransform, VariogramShape};
use crate::stationary::{
    self as st, CmFunction, DerivativeMode, FonsecaParams, GaussianExtendedParams, Laplace2dTransform, LaplaceTransform, Mixture1d, Mixture2d,
    VelocityLaw,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("invalid JSON at line {line}, column {column}: {msg}")]
    Json { line: usize, column: usize, msg: String },
    #[error("{path}: {msg}")]
    Model { path: String, msg: String },
}

impl ConfigError {
    fn at(path: &str, msg: impl Into<String>) -> Self {
        Self::Model { path: path.to_string(), msg: msg.into() }
    }
}

/// One node of the expression tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expr {
    pub op: String,
    #[serde(default, skip_serializing_if = "Map::is_empty")]
    pub params: Map<String, Value>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<Expr>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub m: usize,
    pub dim_space: usize,
    #[serde(default)]
    pub dim_time: usize,
    pub model: Expr,
}

/// A parsed config: the canonical expression and the kernel it builds.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub config: ModelConfig,
    pub spec: KernelSpec,
}

impl Model {
    /// Canonical JSON; parsing it again yields an equal [`KernelSpec`].
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.config).expect("config values are finite")
    }
}

pub fn parse_config(text: &str) -> Result<Model, ConfigError> {
    let raw: ModelConfig = serde_json::from_str(text).map_err(|e| ConfigError::Json { line: e.line(), column: e.column(), msg: e.to_string() })?;
    if raw.m == 0 || raw.dim_space == 0 {
        return Err(ConfigError::at("config", "m and dim_space must be positive"));
    }
    let ctx = Ctx { m: raw.m, dim: raw.dim_space + raw.dim_time, dim_space: raw.dim_space, dim_time: raw.dim_time };
    let (spec, model) = build(&raw.model, ctx, "model")?;
    if spec.m() != raw.m || spec.dim() != ctx.dim {
        return Err(ConfigError::at("model", format!("builds (m, dim) = ({}, {}), config declares ({}, {})", spec.m(), spec.dim(), raw.m, ctx.dim)));
    }
    Ok(Model { config: ModelConfig { model, ..raw }, spec })
}

#[derive(Debug, Clone, Copy)]
struct Ctx {
    m: usize,
    dim: usize,
    dim_space: usize,
    dim_time: usize,
}

impl Ctx {
    fn with_dim(self, dim: usize) -> Self {
        Self { dim, dim_space: dim, dim_time: 0, ..self }
    }

    fn space(self) -> Self {
        self.with_dim(self.dim_space)
    }

    fn time(self) -> Self {
        self.with_dim(self.dim_time)
    }
}

fn parse_params<P: DeserializeOwned>(e: &Expr, path: &str) -> Result<P, ConfigError> {
    serde_json::from_value(Value::Object(e.params.clone())).map_err(|err| ConfigError::at(&format!("{path}.params"), err.to_string()))
}

fn canonical<P: Serialize>(p: &P) -> Map<String, Value> {
    match serde_json::to_value(p).expect("params serialize") {
        Value::Object(m) => m,
        _ => unreachable!("params are structs"),
    }
}

fn arity(e: &Expr, path: &str, n: usize) -> Result<(), ConfigError> {
    if e.children.len() != n {
        return Err(ConfigError::at(path, format!("{} expects {n} child(ren), got {}", e.op, e.children.len())));
    }
    Ok(())
}

fn kernel_err(path: &str) -> impl Fn(KernelError) -> ConfigError + '_ {
    move |e| ConfigError::at(path, e.to_string())
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstantP {
    value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CovarianceP {
    shape: CovShape,
    #[serde(default = "one")]
    scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sill: Option<SymMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PowerP {
    alpha: f64,
    #[serde(default = "one")]
    scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sill: Option<SymMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VariogramP {
    shape: VariogramShape,
    #[serde(default = "one")]
    scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sill: Option<SymMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Empty {}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FactorP {
    factor: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OffsetP {
    offset: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldsP {
    g: Vec<ScalarField>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DelayP {
    delays: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BernsteinP {
    transform: BernsteinTransform,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VelocityP {
    velocity: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TP {
    t: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ZP {
    z: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RatioProductP {
    z: Vec<f64>,
    c: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Mixture2dP {
    mixture: Mixture2d,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TripleP {
    l0: LaplaceTransform,
    l1: LaplaceTransform,
    l2: LaplaceTransform,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NuVecP {
    nu: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GaussianExtendedP {
    sigma: SymMatrix,
    /// One PSD matrix per child variogram.
    #[serde(default)]
    sigmas: Vec<SymMatrix>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LagrangianP {
    sigma: SymMatrix,
    #[serde(default)]
    sigmas: Vec<SymMatrix>,
    theta: Vec<f64>,
    mixture: Mixture1d,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TransportP {
    /// Dimension of the first spatial block; the second gets the rest.
    first_dim: usize,
    transform: Laplace2dTransform,
    law: VelocityLaw,
    n_mc: usize,
    seed: u64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SecondDerivativeP {
    axis: usize,
    #[serde(default = "closed")]
    mode: DerivativeMode,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CmDerivativeP {
    function: CmFunction,
    #[serde(default = "closed")]
    mode: DerivativeMode,
}

fn closed() -> DerivativeMode {
    DerivativeMode::Closed
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InfDivP {
    a: f64,
    #[serde(default)]
    b: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NuP {
    nu: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PowerR {
    r: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AskeyP {
    s: f64,
    nu: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PaciorekP {
    field: LocalAnisotropyField,
    nodes: Vec<QuadNode>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NsMaternP {
    field: LocalAnisotropyField,
    nu: Vec<ScalarField>,
}

/// Every op name the config language accepts.
pub const OPS: &[&str] = &[
    "constant",
    "covariance",
    "pcv_power",
    "power_law",
    "pcv_shape",
    "sum",
    "schur",
    "scale",
    "constant_shift",
    "pcv_from_g_and_c",
    "pcv_from_cross_variogram",
    "pcv_oesting",
    "pcv_delay",
    "pcv_bernstein",
    "pcv_nested_spacetime",
    "pcv_transport",
    "schoenberg_exp",
    "increment_cov",
    "ratio_product_model",
    "laplace2d_mixture",
    "toy_ei_model",
    "triple_laplace",
    "fonseca_steel",
    "matern_mixture",
    "gaussian_extended",
    "lagrangian_mixture",
    "transport_mixture",
    "second_derivative_cov",
    "cm_derivative_cov",
    "isotropic_descent",
    "infdiv_ratio",
    "cosh_ratio",
    "hadamard_power",
    "askey_beta",
    "paciorek_mixture",
    "nonstationary_matern",
];

type Built = (KernelSpec, Expr);

fn build(e: &Expr, ctx: Ctx, path: &str) -> Result<Built, ConfigError> {
    let child = |k: usize, c: Ctx| build(&e.children[k], c, &format!("{path}.children[{k}]"));
    let all_children = |c: Ctx| -> Result<Vec<Built>, ConfigError> { (0..e.children.len()).map(|k| child(k, c)).collect() };
    let kerr = kernel_err(path);
    let done = |spec: KernelSpec, params: Map<String, Value>, kids: Vec<Built>| -> Built {
        (spec, Expr { op: e.op.clone(), params, children: kids.into_iter().map(|(_, x)| x).collect() })
    };
    macro_rules! unary {
        ($P:ty, |$p:ident, $g:ident| $body:expr) => {{
            arity(e, path, 1)?;
            let $p: $P = parse_params(e, path)?;
            let kid = child(0, ctx)?;
            let $g = &kid.0;
            let spec = $body.map_err(&kerr)?;
            done(spec, canonical(&$p), vec![kid])
        }};
    }
    macro_rules! pair {
        ($P:ty, |$p:ident, $a:ident, $b:ident| $body:expr) => {{
            arity(e, path, 2)?;
            let $p: $P = parse_params(e, path)?;
            let ka = child(0, ctx.space())?;
            let kb = child(1, ctx.time())?;
            let ($a, $b) = (&ka.0, &kb.0);
            let spec = $body.map_err(&kerr)?;
            done(spec, canonical(&$p), vec![ka, kb])
        }};
    }
    let built = match e.op.as_str() {
        "constant" => {
            arity(e, path, 0)?;
            let p: ConstantP = parse_params(e, path)?;
            let spec = kernel::constant(p.m.unwrap_or(ctx.m), p.dim.unwrap_or(ctx.dim), p.value).map_err(&kerr)?;
            done(spec, canonical(&p), vec![])
        }
        "covariance" => {
            arity(e, path, 0)?;
            let p: CovarianceP = parse_params(e, path)?;
            let spec = kernel::covariance(p.m.unwrap_or(ctx.m), p.dim.unwrap_or(ctx.dim), p.shape.clone(), p.scale, p.sill.clone()).map_err(&kerr)?;
            done(spec, canonical(&p), vec![])
        }
        "pcv_power" | "power_law" => {
            arity(e, path, 0)?;
            let p: PowerP = parse_params(e, path)?;
            let f = if e.op == "pcv_power" { pcv::pcv_power } else { pcv::power_law };
            let spec = f(p.m.unwrap_or(ctx.m), p.dim.unwrap_or(ctx.dim), p.alpha, p.scale, p.sill.clone()).map_err(&kerr)?;
            done(spec, canonical(&p), vec![])
        }
        "pcv_shape" => {
            arity(e, path, 0)?;
            let p: VariogramP = parse_params(e, path)?;
            let spec = pcv::pcv_shape(p.m.unwrap_or(ctx.m), p.dim.unwrap_or(ctx.dim), p.shape, p.scale, p.sill.clone()).map_err(&kerr)?;
            done(spec, canonical(&p), vec![])
        }
        "sum" | "schur" => {
            let p: Empty = parse_params(e, path)?;
            let kids = all_children(ctx)?;
            let specs: Vec<KernelSpec> = kids.iter().map(|(s, _)| s.clone()).collect();
            let spec = if e.op == "sum" { kernel::combine_sum(&specs) } else { kernel::combine_schur(&specs) }.map_err(&kerr)?;
            done(spec, canonical(&p), kids)
        }
        "scale" => unary!(FactorP, |p, g| kernel::scale(g, p.factor)),
        "constant_shift" => unary!(OffsetP, |p, g| kernel::constant_shift(g, p.offset)),
        "pcv_from_g_and_c" => unary!(FieldsP, |p, g| pcv::pcv_from_g_and_c(p.g.clone(), g)),
        "pcv_from_cross_variogram" => unary!(Empty, |p, g| pcv::pcv_from_cross_variogram(g)),
        "pcv_oesting" => {
            arity(e, path, 2)?;
            let p: Empty = parse_params(e, path)?;
            let kids = all_children(ctx)?;
            let spec = pcv::pcv_oesting(&kids[0].0, &kids[1].0).map_err(&kerr)?;
            done(spec, canonical(&p), kids)
        }
        "pcv_delay" => unary!(DelayP, |p, g| pcv::pcv_delay(g, p.delays.clone())),
        "pcv_bernstein" => unary!(BernsteinP, |p, g| pcv::pcv_bernstein(g, p.transform)),
        "pcv_nested_spacetime" => pair!(Empty, |p, a, b| pcv::pcv_nested_spacetime(a, b)),
        "pcv_transport" => {
            arity(e, path, 1)?;
            let p: VelocityP = parse_params(e, path)?;
            let kid = child(0, ctx.with_dim(ctx.dim.saturating_sub(1)))?;
            let spec = pcv::pcv_transport(&kid.0, p.velocity.clone()).map_err(&kerr)?;
            done(spec, canonical(&p), vec![kid])
        }
        "schoenberg_exp" => unary!(TP, |p, g| st::schoenberg_exp(g, p.t)),
        "increment_cov" => unary!(ZP, |p, g| st::increment_cov(g, p.z.clone())),
        "ratio_product_model" => unary!(RatioProductP, |p, g| st::ratio_product_model(g, p.z.clone(), p.c)),
        "laplace2d_mixture" => pair!(Mixture2dP, |p, a, b| st::laplace2d_mixture(a, b, p.mixture.clone())),
        "toy_ei_model" => pair!(Empty, |p, a, b| st::toy_ei_model(a, b)),
        "triple_laplace" => pair!(TripleP, |p, a, b| st::triple_laplace(a, b, p.l0, p.l1, p.l2)),
        "fonseca_steel" => pair!(FonsecaParams, |p, a, b| st::fonseca_steel(a, b, p)),
        "matern_mixture" => pair!(NuVecP, |p, a, b| st::matern_mixture(a, b, p.nu.clone())),
        "gaussian_extended" | "lagrangian_mixture" => {
            let (sigma, sigmas, extra) = if e.op == "gaussian_extended" {
                let p: GaussianExtendedP = parse_params(e, path)?;
                let c = canonical(&p);
                (p.sigma, p.sigmas, (None, c))
            } else {
                let p: LagrangianP = parse_params(e, path)?;
                let c = canonical(&p);
                (p.sigma, p.sigmas, (Some((p.theta, p.mixture)), c))
            };
            if sigmas.len() != e.children.len() {
                return Err(ConfigError::at(path, format!("{} sigmas for {} child variogram(s)", sigmas.len(), e.children.len())));
            }
            let dim_time = ctx.dim.checked_sub(sigma.order()).filter(|k| *k > 0).ok_or_else(|| {
                ConfigError::at(path, format!("sigma of order {} leaves no time coordinate in dimension {}", sigma.order(), ctx.dim))
            })?;
            let kids = all_children(ctx.with_dim(dim_time))?;
            let terms = sigmas.into_iter().zip(kids.iter().map(|(s, _)| s.clone())).collect();
            let params = GaussianExtendedParams { m: ctx.m, sigma, terms, dim_time };
            let spec = match extra.0 {
                None => st::gaussian_extended(params),
                Some((theta, mixture)) => st::lagrangian_mixture(params, theta, mixture),
            }
            .map_err(&kerr)?;
            done(spec, extra.1, kids)
        }
        "transport_mixture" => {
            arity(e, path, 2)?;
            let p: TransportP = parse_params(e, path)?;
            let rest = ctx.dim.checked_sub(p.first_dim + 1).filter(|r| *r > 0 && p.first_dim > 0).ok_or_else(|| {
                ConfigError::at(path, format!("first_dim = {} does not split dimension {} into two spatial blocks and time", p.first_dim, ctx.dim))
            })?;
            let ka = child(0, ctx.with_dim(p.first_dim))?;
            let kb = child(1, ctx.with_dim(rest))?;
            let spec = st::transport_mixture(&ka.0, &kb.0, p.transform, p.law.clone(), p.n_mc, p.seed).map_err(&kerr)?;
            done(spec, canonical(&p), vec![ka, kb])
        }
        "second_derivative_cov" => unary!(SecondDerivativeP, |p, g| st::second_derivative_cov(g, p.axis, p.mode)),
        "cm_derivative_cov" => unary!(CmDerivativeP, |p, g| st::cm_derivative_cov(g, p.function, p.mode)),
        "isotropic_descent" => {
            arity(e, path, 1)?;
            let p: Empty = parse_params(e, path)?;
            let kid = child(0, ctx.with_dim(ctx.dim + 1))?;
            let spec = st::isotropic_descent(&kid.0).map_err(&kerr)?;
            done(spec, canonical(&p), vec![kid])
        }
        "infdiv_ratio" => unary!(InfDivP, |p, g| st::infdiv_ratio(g, p.a, p.b)),
        "cosh_ratio" => unary!(NuP, |p, g| st::cosh_ratio(g, p.nu)),
        "hadamard_power" => unary!(PowerR, |p, g| st::hadamard_power(g, p.r)),
        "askey_beta" => unary!(AskeyP, |p, g| ns::askey_beta(g, p.s, p.nu)),
        "paciorek_mixture" => unary!(PaciorekP, |p, g| ns::paciorek_mixture(p.field.clone(), g, p.nodes.clone())),
        "nonstationary_matern" => unary!(NsMaternP, |p, g| ns::nonstationary_matern(p.field.clone(), p.nu.clone(), g)),
        other => return Err(ConfigError::at(path, format!("unknown op {other:?}"))),
    };
    Ok(built)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roundtrip(text: &str) -> Model {
        let a = parse_config(text).unwrap_or_else(|e| panic!("{e}"));
        let b = parse_config(&a.to_json()).unwrap();
        assert_eq!(a.spec, b.spec);
        assert_eq!(a.config, b.config);
        a
    }

    #[test]
    fn delay_schoenberg_roundtrip() {
        let m = roundtrip(
            r#"{"m": 2, "dim_space": 1, "model": {"op": "schoenberg_exp", "params": {"t": 1.0},
                "children": [{"op": "pcv_delay", "params": {"delays": [[0.0], [0.3]]},
                    "children": [{"op": "pcv_power", "params": {"alpha": 1.0, "m": 1}}]}]}}"#,
        );
        assert!(m.spec.kind().is_pd());
        assert_eq!(m.spec.m(), 2);
    }

    #[test]
    fn space_time_roundtrip() {
        roundtrip(
            r#"{"m": 1, "dim_space": 2, "dim_time": 1, "model": {"op": "fonseca_steel",
                "params": {"a0": 1.0, "a1": 2.0, "a2": 1.5, "lambda0": 0.7, "lambda1": 0.4, "lambda2": 1.2, "delta": 0.3},
                "children": [{"op": "pcv_power", "params": {"alpha": 1.0}}, {"op": "pcv_power", "params": {"alpha": 1.5}}]}}"#,
        );
        roundtrip(
            r#"{"m": 2, "dim_space": 2, "dim_time": 1, "model": {"op": "lagrangian_mixture",
                "params": {"sigma": [[1.0, 0.0], [0.0, 1.0]], "sigmas": [[[0.5, 0.1], [0.1, 0.3]]], "theta": [0.5, 0.0],
                           "mixture": {"type": "transform", "transform": {"family": "gamma", "shape": 2.0, "rate": 1.0}}},
                "children": [{"op": "pcv_power", "params": {"alpha": 1.0}}]}}"#,
        );
    }

    #[test]
    fn errors_carry_position() {
        match parse_config("{\"m\": 1,\n \"dim_space\": }") {
            Err(ConfigError::Json { line: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
        let e = parse_config(r#"{"m": 1, "dim_space": 1, "model": {"op": "scale", "params": {"factor": 2.0}, "children": [{"op": "nope"}]}}"#)
            .unwrap_err();
        assert_eq!(e.to_string(), "model.children[0]: unknown op \"nope\"");
        let e = parse_config(r#"{"m": 1, "dim_space": 1, "model": {"op": "pcv_power", "params": {"alpha": 2.5}}}"#).unwrap_err();
        assert!(e.to_string().starts_with("model: pcv_power"));
        let e = parse_config(r#"{"m": 1, "dim_space": 1, "model": {"op": "pcv_power", "params": {"alpha": 1.0, "bogus": 1}}}"#).unwrap_err();
        assert!(e.to_string().contains("model.params"));
    }

    #[test]
    fn every_op_is_dispatched() {
        for op in OPS {
            let text = format!(r#"{{"m": 1, "dim_space": 1, "model": {{"op": "{op}"}}}}"#);
            let e = parse_config(&text).err().map(|e| e.to_string()).unwrap_or_default();
            assert!(!e.contains("unknown op"), "{op}");
        }
    }
}
