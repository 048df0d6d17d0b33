//! Stationary positive definite matrix-valued kernels built from pseudo
//! cross-variograms.

mod derivative;
mod gaussian;
mod infdiv;
pub mod laplace;
mod mixture;
mod schoenberg;
mod transport;

pub use derivative::{
    cm_derivative_cov, isotropic_descent, numeric_partials, second_derivative_cov, CmDerivativeCov, CmFunction, DerivativeMode, IsotropicDescent,
    NumericPartials, SecondDerivativeCov,
};
pub use gaussian::{gaussian_extended, lagrangian_mixture, GaussianExtended, GaussianExtendedParams, LagrangianMixture};
pub use infdiv::{cosh_ratio, cosh_ratio_product, hadamard_power, infdiv_ratio, is_infinitely_divisible, CoshRatio, HadamardPower, InfDivRatio};
pub use laplace::{LaplaceTransform, Mixture1d, MixtureNode1d};
pub use mixture::{
    fonseca_steel, laplace2d_mixture, matern_mixture, matern_mixture_entry, toy_ei_laplace, toy_ei_model, triple_laplace, Density2d, FonsecaParams,
    FonsecaSteel, Laplace2dMixture, MaternBranch, MaternMixture, Mixture2d, MixtureNode2d, ToyEi, TripleLaplace,
};
pub use schoenberg::{increment_cov, ratio_product_model, schoenberg_exp, IncrementCov, RatioProduct, SchoenbergExp};
pub use transport::{transport_mixture, Laplace2dTransform, TransportMixture, VelocityLaw};

use crate::error::KernelError;
use crate::kernel::{KernelSpec, Mat};

/// Spatial and temporal variograms sharing `m`; points are `(space, time)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimePair {
    pub spatial: KernelSpec,
    pub temporal: KernelSpec,
}

impl SpaceTimePair {
    pub(crate) fn new(op: &'static str, gs: &KernelSpec, gt: &KernelSpec) -> Result<Self, KernelError> {
        if gs.m() != gt.m() {
            return Err(KernelError::shape(op, format!("spatial m = {} but temporal m = {}", gs.m(), gt.m())));
        }
        Ok(Self { spatial: gs.clone(), temporal: gt.clone() })
    }

    pub fn m(&self) -> usize {
        self.spatial.m()
    }

    pub fn dim(&self) -> usize {
        self.spatial.dim() + self.temporal.dim()
    }

    pub(crate) fn eval(&self, x: &[f64], y: &[f64]) -> Result<(Mat, Mat), KernelError> {
        let d = self.spatial.dim();
        Ok((self.spatial.eval(&x[..d], &y[..d])?, self.temporal.eval(&x[d..], &y[d..])?))
    }

    pub(crate) fn cnd(&self) -> bool {
        self.spatial.kind().is_cnd() && self.temporal.kind().is_cnd()
    }

    pub(crate) fn pcv(&self) -> bool {
        self.spatial.kind().is_pcv() && self.temporal.kind().is_pcv()
    }

    pub(crate) fn stationary(&self) -> bool {
        self.spatial.is_stationary() && self.temporal.is_stationary()
    }

    pub(crate) fn children(&self) -> Vec<&KernelSpec> {
        vec![&self.spatial, &self.temporal]
    }
}
