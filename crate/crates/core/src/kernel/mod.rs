//! Matrix-valued kernels as immutable expression trees.
//!
//! A [`KernelSpec`] is a cheap-to-clone handle on a tree of [`Node`]s. Each
//! node owns validated parameters and its children; evaluation returns the
//! `m x m` block `K(x, y)`. Space-time kernels take points of length `d + k`
//! and split them according to their children's dimensions.

mod claims;
mod combinators;
mod field;
pub(crate) mod leaves;
mod points;

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;

pub use claims::{KernelKind, KindLabel};
pub use combinators::{combine_schur, combine_sum, constant_shift, scale, ScaledKernel, SchurKernel, ShiftedKernel, SumKernel};
pub use field::ScalarField;
pub use leaves::{constant, covariance, ConstantKernel, CovShape, CovarianceKernel};
pub use points::PointSet;

use crate::error::KernelError;
use crate::linalg::SymMatrix;
use crate::nonstationary::{AskeyBeta, NonstationaryMatern, PaciorekMixture};
use crate::pcv::{BernsteinPcv, DelayPcv, FromCrossVariogram, GMinusC, NestedSpaceTime, OestingPcv, TransportPcv, VariogramKernel};
use crate::stationary::{
    CmDerivativeCov, CoshRatio, FonsecaSteel, GaussianExtended, HadamardPower, IncrementCov, InfDivRatio, IsotropicDescent, LagrangianMixture,
    Laplace2dMixture, MaternMixture, RatioProduct, SchoenbergExp, SecondDerivativeCov, ToyEi, TransportMixture, TripleLaplace,
};

pub type Mat = DMatrix<f64>;

/// Value and first two partial derivatives with respect to one coordinate of `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Derivatives {
    pub value: Mat,
    pub first: Mat,
    pub second: Mat,
}

impl Derivatives {
    pub(crate) fn constant(value: Mat) -> Self {
        let z = Mat::zeros(value.nrows(), value.ncols());
        Self { value, first: z.clone(), second: z }
    }
}

/// Isotropic profile `g(t)` and `g'(t)` at `t = |h|^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    pub value: Mat,
    pub slope: Mat,
}

/// Behaviour shared by every node type.
pub(crate) trait Component: fmt::Debug + Send + Sync {
    fn op(&self) -> &'static str;
    fn m(&self) -> usize;
    fn dim(&self) -> usize;
    fn kind(&self) -> KernelKind;
    fn stationary(&self) -> bool;
    fn eval(&self, x: &[f64], y: &[f64]) -> Result<Mat, KernelError>;

    fn children(&self) -> Vec<&KernelSpec> {
        Vec::new()
    }

    /// Closed-form partials in `x[axis]`; `None` when the family is not smooth.
    fn derivatives(&self, _x: &[f64], _y: &[f64], _axis: usize) -> Option<Result<Derivatives, KernelError>> {
        None
    }

    fn has_derivatives(&self, _axis: usize) -> bool {
        false
    }

    fn radial(&self, _t: f64) -> Option<Result<RadialProfile, KernelError>> {
        None
    }

    fn has_radial(&self) -> bool {
        false
    }

    /// Scope limitations of the validity claim, surfaced in reports.
    fn caveats(&self) -> Vec<String> {
        Vec::new()
    }
}

macro_rules! nodes {
    ($($variant:ident($ty:ty)),* $(,)?) => {
        /// One node of a kernel expression tree.
        #[derive(Debug, Clone, PartialEq)]
        pub enum Node {
            $($variant($ty)),*
        }

        impl Node {
            pub(crate) fn component(&self) -> &dyn Component {
                match self {
                    $(Node::$variant(c) => c),*
                }
            }
        }

        $(
            impl From<$ty> for Node {
                fn from(c: $ty) -> Self {
                    Node::$variant(c)
                }
            }
        )*
    };
}

nodes! {
    Constant(ConstantKernel),
    Covariance(CovarianceKernel),
    Sum(SumKernel),
    Schur(SchurKernel),
    Scale(ScaledKernel),
    Shift(ShiftedKernel),
    Variogram(VariogramKernel),
    GMinusC(GMinusC),
    FromCrossVariogram(FromCrossVariogram),
    Oesting(OestingPcv),
    Delay(DelayPcv),
    Bernstein(BernsteinPcv),
    NestedSpaceTime(NestedSpaceTime),
    Transport(TransportPcv),
    Schoenberg(SchoenbergExp),
    Increment(IncrementCov),
    RatioProduct(RatioProduct),
    Laplace2d(Laplace2dMixture),
    ToyEi(ToyEi),
    TripleLaplace(TripleLaplace),
    FonsecaSteel(FonsecaSteel),
    MaternMixture(MaternMixture),
    GaussianExtended(GaussianExtended),
    Lagrangian(LagrangianMixture),
    TransportMixture(TransportMixture),
    SecondDerivative(SecondDerivativeCov),
    CmDerivative(CmDerivativeCov),
    IsotropicDescent(IsotropicDescent),
    InfDivRatio(InfDivRatio),
    CoshRatio(CoshRatio),
    HadamardPower(HadamardPower),
    Askey(AskeyBeta),
    Paciorek(PaciorekMixture),
    NonstationaryMatern(NonstationaryMatern),
}

struct SpecInner {
    node: Node,
    m: usize,
    dim: usize,
    kind: KernelKind,
    stationary: bool,
}

/// Immutable, shareable handle on a kernel expression tree.
#[derive(Clone)]
pub struct KernelSpec(Arc<SpecInner>);

impl KernelSpec {
    pub fn new(node: impl Into<Node>) -> Self {
        let node = node.into();
        let c = node.component();
        let (m, dim, kind, stationary) = (c.m(), c.dim(), c.kind(), c.stationary());
        Self(Arc::new(SpecInner { node, m, dim, kind, stationary }))
    }

    pub fn node(&self) -> &Node {
        &self.0.node
    }

    pub fn op(&self) -> &'static str {
        self.component().op()
    }

    /// Number of variables.
    pub fn m(&self) -> usize {
        self.0.m
    }

    /// Total point dimension (space plus time).
    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn kind(&self) -> KernelKind {
        self.0.kind
    }

    pub fn is_stationary(&self) -> bool {
        self.0.stationary
    }

    pub fn children(&self) -> Vec<&KernelSpec> {
        self.component().children()
    }

    fn component(&self) -> &dyn Component {
        self.0.node.component()
    }

    /// `K(x, y)` with dimension checks.
    pub fn evaluate(&self, x: &[f64], y: &[f64]) -> Result<Mat, KernelError> {
        self.check_point(x)?;
        self.check_point(y)?;
        self.eval(x, y)
    }

    pub(crate) fn eval(&self, x: &[f64], y: &[f64]) -> Result<Mat, KernelError> {
        self.component().eval(x, y)
    }

    fn check_point(&self, x: &[f64]) -> Result<(), KernelError> {
        if x.len() != self.dim() {
            return Err(KernelError::Dimension { expected: self.dim(), got: x.len() });
        }
        Ok(())
    }

    /// Closed-form partials in `x[axis]`, if the family supports them.
    pub fn derivatives(&self, x: &[f64], y: &[f64], axis: usize) -> Option<Result<Derivatives, KernelError>> {
        if axis >= self.dim() {
            return Some(Err(KernelError::Dimension { expected: self.dim(), got: axis + 1 }));
        }
        self.component().derivatives(x, y, axis)
    }

    pub fn has_derivatives(&self, axis: usize) -> bool {
        self.component().has_derivatives(axis)
    }

    /// Isotropic profile at `t = |h|^2`, if the family is isotropic in closed form.
    pub fn radial(&self, t: f64) -> Option<Result<RadialProfile, KernelError>> {
        self.component().radial(t)
    }

    pub fn has_radial(&self) -> bool {
        self.component().has_radial()
    }

    /// Scope notes collected over the whole tree.
    pub fn caveats(&self) -> Vec<String> {
        let mut out = self.component().caveats();
        for child in self.children() {
            for c in child.caveats() {
                if !out.contains(&c) {
                    out.push(c);
                }
            }
        }
        out
    }
}

impl PartialEq for KernelSpec {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.node == other.0.node
    }
}

impl fmt::Debug for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelSpec").field("m", &self.m()).field("dim", &self.dim()).field("kind", &self.kind()).field("node", &self.0.node).finish()
    }
}

/// Anything that yields `m x m` blocks on points of a fixed dimension.
pub trait MatrixKernel: Sync {
    fn m(&self) -> usize;
    fn dim(&self) -> usize;
    fn evaluate(&self, x: &[f64], y: &[f64]) -> Result<Mat, KernelError>;

    /// Scope notes a numerical check should carry along.
    fn caveats(&self) -> Vec<String> {
        Vec::new()
    }
}

impl MatrixKernel for KernelSpec {
    fn m(&self) -> usize {
        KernelSpec::m(self)
    }

    fn dim(&self) -> usize {
        KernelSpec::dim(self)
    }

    fn evaluate(&self, x: &[f64], y: &[f64]) -> Result<Mat, KernelError> {
        KernelSpec::evaluate(self, x, y)
    }

    fn caveats(&self) -> Vec<String> {
        KernelSpec::caveats(self)
    }
}

/// Ad-hoc kernel from a closure, for checking expressions outside the
/// shipped families.
pub struct FnKernel<F> {
    m: usize,
    dim: usize,
    f: F,
}

impl<F> FnKernel<F>
where
    F: Fn(&[f64], &[f64]) -> Mat + Sync,
{
    pub fn new(m: usize, dim: usize, f: F) -> Self {
        Self { m, dim, f }
    }
}

impl<F> MatrixKernel for FnKernel<F>
where
    F: Fn(&[f64], &[f64]) -> Mat + Sync,
{
    fn m(&self) -> usize {
        self.m
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn evaluate(&self, x: &[f64], y: &[f64]) -> Result<Mat, KernelError> {
        Ok((self.f)(x, y))
    }
}

/// Evaluation failure located at a pair of points.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("at points ({i}, {j}): {source}")]
pub struct GramError {
    pub i: usize,
    pub j: usize,
    #[source]
    pub source: KernelError,
}

pub fn evaluate_block<K: MatrixKernel + ?Sized>(kernel: &K, x: &[f64], y: &[f64]) -> Result<Mat, KernelError> {
    kernel.evaluate(x, y)
}

/// Block Gram matrix with entry `(i*m + p, j*m + q) = K_pq(x_i, x_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMatrix {
    pub n: usize,
    pub m: usize,
    pub data: SymMatrix,
}

impl BlockMatrix {
    pub fn entry(&self, i: usize, p: usize, j: usize, q: usize) -> f64 {
        self.data.get(i * self.m + p, j * self.m + q)
    }
}

/// Assembles the block Gram matrix, averaging `K(x_i, x_j)` with `K(x_j, x_i)^T`.
pub fn assemble_gram<K: MatrixKernel + ?Sized>(kernel: &K, pts: &PointSet) -> Result<BlockMatrix, GramError> {
    let n = pts.len();
    let m = kernel.m();
    if pts.dim() != kernel.dim() {
        return Err(GramError { i: 0, j: 0, source: KernelError::Dimension { expected: kernel.dim(), got: pts.dim() } });
    }
    let rows: Vec<Vec<Mat>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i..n)
                .map(|j| {
                    let at = |source| GramError { i, j, source };
                    let a = kernel.evaluate(pts.point(i), pts.point(j)).map_err(at)?;
                    let b = kernel.evaluate(pts.point(j), pts.point(i)).map_err(at)?;
                    let block = (a + b.transpose()) * 0.5;
                    if let Some((p, q)) = first_non_finite(&block) {
                        return Err(at(KernelError::eval("assemble_gram", p, q, "non-finite value")));
                    }
                    Ok(block)
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let size = n * m;
    let mut full = Mat::zeros(size, size);
    for (i, row) in rows.iter().enumerate() {
        for (off, block) in row.iter().enumerate() {
            let j = i + off;
            for p in 0..m {
                for q in 0..m {
                    full[(i * m + p, j * m + q)] = block[(p, q)];
                    full[(j * m + q, i * m + p)] = block[(p, q)];
                }
            }
        }
    }
    let data = SymMatrix::new(full).map_err(|e| GramError { i: 0, j: 0, source: KernelError::eval("assemble_gram", 0, 0, e.to_string()) })?;
    Ok(BlockMatrix { n, m, data })
}

pub(crate) fn first_non_finite(m: &Mat) -> Option<(usize, usize)> {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if !m[(i, j)].is_finite() {
                return Some((i, j));
            }
        }
    }
    None
}

/// `x - y` as a new vector.
pub(crate) fn diff(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

pub(crate) fn sq_norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum()
}

pub(crate) fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Applies `f(i, j, value)` entrywise, propagating the first error.
pub(crate) fn map_entries(src: &Mat, mut f: impl FnMut(usize, usize, f64) -> Result<f64, KernelError>) -> Result<Mat, KernelError> {
    let mut out = Mat::zeros(src.nrows(), src.ncols());
    for j in 0..src.ncols() {
        for i in 0..src.nrows() {
            out[(i, j)] = f(i, j, src[(i, j)])?;
        }
    }
    Ok(out)
}

/// Requires a shared `m` and dimension across `specs`.
pub(crate) fn require_same_shape(op: &'static str, specs: &[&KernelSpec]) -> Result<(usize, usize), KernelError> {
    let first = specs.first().ok_or_else(|| KernelError::shape(op, "needs at least one child"))?;
    for s in specs.iter().skip(1) {
        if s.m() != first.m() || s.dim() != first.dim() {
            return Err(KernelError::shape(op, format!("children have (m, dim) = ({}, {}) and ({}, {})", first.m(), first.dim(), s.m(), s.dim())));
        }
    }
    Ok((first.m(), first.dim()))
}

pub(crate) fn require_positive(op: &'static str, name: &str, v: f64) -> Result<(), KernelError> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(KernelError::param(op, format!("{name} must be positive and finite, got {v}")));
    }
    Ok(())
}

pub(crate) fn require_finite(op: &'static str, name: &str, v: &[f64]) -> Result<(), KernelError> {
    if let Some(bad) = v.iter().find(|a| !a.is_finite()) {
        return Err(KernelError::param(op, format!("{name} has non-finite entry {bad}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_sum_and_schur_identity() {
        let a = constant(2, 1, 1.5).unwrap();
        let b = constant(2, 1, 0.25).unwrap();
        let s = combine_sum(&[a.clone(), b]).unwrap();
        let v = s.evaluate(&[0.3], &[-2.0]).unwrap();
        assert!(v.iter().all(|&e| e == 1.75));

        let e = covariance(2, 1, CovShape::Exponential, 1.0, None).unwrap();
        let ones = constant(2, 1, 1.0).unwrap();
        let p = combine_schur(&[e.clone(), ones]).unwrap();
        assert_eq!(p.evaluate(&[0.1], &[0.9]).unwrap(), e.evaluate(&[0.1], &[0.9]).unwrap());
    }

    #[test]
    fn exponential_leaf_values() {
        let e = covariance(1, 2, CovShape::Exponential, 1.0, None).unwrap();
        assert_eq!(e.evaluate(&[0.5, 0.5], &[0.5, 0.5]).unwrap()[(0, 0)], 1.0);
        let v = e.evaluate(&[0.0, 0.0], &[0.6, 0.8]).unwrap()[(0, 0)];
        assert!((v - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn gram_layout_round_trip() {
        let sill = SymMatrix::from_rows(&[vec![1.0, 0.5], vec![0.5, 2.0]]).unwrap();
        let e = covariance(2, 1, CovShape::Exponential, 1.3, Some(sill)).unwrap();
        let pts = PointSet::from_rows(1, 0, &[vec![0.0], vec![0.4], vec![1.7]]).unwrap();
        let g = assemble_gram(&e, &pts).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let b = e.evaluate(pts.point(i), pts.point(j)).unwrap();
                for p in 0..2 {
                    for q in 0..2 {
                        assert_eq!(g.entry(i, p, j, q), b[(p, q)]);
                    }
                }
            }
        }
    }

    #[test]
    fn collinear_exponential_gram() {
        let e = covariance(1, 1, CovShape::Exponential, 1.0, None).unwrap();
        let pts = PointSet::from_rows(1, 0, &[vec![0.0], vec![1.0], vec![2.0]]).unwrap();
        let g = assemble_gram(&e, &pts).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = (-((i as f64) - (j as f64)).abs()).exp();
                assert!((g.data.get(i, j) - want).abs() < 1e-15);
            }
        }
        assert!(crate::linalg::min_eigenvalue(&g.data).unwrap().min_eigenvalue > 0.0);
    }

    #[test]
    fn dimension_checked() {
        let e = covariance(1, 2, CovShape::Gaussian, 1.0, None).unwrap();
        assert!(matches!(e.evaluate(&[0.0], &[0.0, 1.0]), Err(KernelError::Dimension { expected: 2, got: 1 })));
    }
}
