//! Gaussian sampling from block Gram matrices and the empirical pseudo
//! cross-variogram of the resulting fields.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use thiserror::Error;

use crate::error::KernelError;
use crate::kernel::{assemble_gram, GramError, Mat, MatrixKernel, PointSet};
use crate::linalg::{cholesky_default, LinalgError};
use crate::validation::{check_points, CheckMode};

/// Relative tolerance of the pre-sampling definiteness check.
pub const PSD_TOL_REL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimulationError {
    #[error(transparent)]
    Gram(#[from] GramError),
    #[error("kernel: {0}")]
    Kernel(#[from] KernelError),
    #[error("Gram matrix is not PSD: minimum eigenvalue {min_eigenvalue:.6e} against scale {scale:.6e}")]
    NotPsd { min_eigenvalue: f64, scale: f64 },
    #[error("factorization failed: {0}")]
    Factorization(#[from] LinalgError),
    #[error("{0}")]
    Spectrum(String),
    #[error("realizations disagree on {0}")]
    Mismatch(&'static str),
    #[error("no realizations")]
    Empty,
    #[error("lag {index} has {got} coordinates, points have {expected}")]
    LagDimension { index: usize, expected: usize, got: usize },
}

/// One draw of the field at fixed locations.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub pts: PointSet,
    /// `n x m`: row per location, column per variable.
    pub values: Mat,
    pub seed: u64,
    /// Stream index of this draw under `seed`.
    pub index: usize,
    /// Diagonal shift that made the factorization succeed.
    pub jitter_applied: f64,
}

/// `n_real` zero-mean draws with covariance `G + jitter I`. Draw `r` uses
/// ChaCha8 stream `r` of `seed`, so any subset can be regenerated alone.
/// Unless `force` is set the Gram matrix must pass the PD check on `pts`.
pub fn sample_gaussian<K: MatrixKernel + ?Sized>(
    kernel: &K,
    pts: &PointSet,
    n_real: usize,
    seed: u64,
    force: bool,
) -> Result<Vec<Realization>, SimulationError> {
    let gram = assemble_gram(kernel, pts)?;
    if !force {
        let c = check_points(kernel, pts, CheckMode::Pd).map_err(SimulationError::Spectrum)?;
        if c.value < -PSD_TOL_REL * c.scale {
            return Err(SimulationError::NotPsd { min_eigenvalue: c.value, scale: c.scale });
        }
    }
    let chol = cholesky_default(&gram.data)?;
    let (n, m) = (pts.len(), kernel.m());
    Ok((0..n_real)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let z = DVector::from_fn(n * m, |_, _| StandardNormal.sample(&mut rng));
            let v = &chol.lower * z;
            Realization { pts: pts.clone(), values: Mat::from_fn(n, m, |i, p| v[i * m + p]), seed, index: r, jitter_applied: chol.jitter }
        })
        .collect())
}

/// `gamma_ij(h) = (C_ii(0) + C_jj(0)) / 2 - C_ij(h, 0)` for a stationary kernel.
pub fn theoretical_pcv<K: MatrixKernel + ?Sized>(kernel: &K, lag: &[f64]) -> Result<Mat, KernelError> {
    let origin = vec![0.0; lag.len()];
    let c0 = kernel.evaluate(&origin, &origin)?;
    let ch = kernel.evaluate(lag, &origin)?;
    Ok(Mat::from_fn(c0.nrows(), c0.ncols(), |i, j| 0.5 * (c0[(i, i)] + c0[(j, j)]) - ch[(i, j)]))
}

/// Estimate at one lag vector.
#[derive(Debug, Clone, PartialEq)]
pub struct LagBin {
    pub lag: Vec<f64>,
    /// Location pairs `(a, b)` with `x_a - x_b = lag` within the radius.
    pub pairs: usize,
    /// `None` for empty bins.
    pub estimate: Option<Mat>,
    /// Batch-means standard error, when at least two batches exist.
    pub std_error: Option<Mat>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalPcv {
    pub m: usize,
    pub n_real: usize,
    pub n_batches: usize,
    pub bins: Vec<LagBin>,
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.carry
    }
}

/// `gamma_ij(h) = sum (Z_i(x + h) - Z_j(x))^2 / (2 N_pairs n_real)` with no
/// mean correction; realizations are split into `n_batches` contiguous
/// batches for the standard error.
pub fn empirical_pcv(reals: &[Realization], lags: &[Vec<f64>], tolerance_radius: f64, n_batches: usize) -> Result<EmpiricalPcv, SimulationError> {
    let first = reals.first().ok_or(SimulationError::Empty)?;
    let m = first.values.ncols();
    if reals.iter().any(|r| r.pts != first.pts) {
        return Err(SimulationError::Mismatch("locations"));
    }
    if reals.iter().any(|r| r.values.ncols() != m) {
        return Err(SimulationError::Mismatch("number of variables"));
    }
    let pts = &first.pts;
    let n_batches = n_batches.clamp(1, reals.len());
    let bins = lags
        .iter()
        .enumerate()
        .map(|(index, lag)| {
            if lag.len() != pts.dim() {
                return Err(SimulationError::LagDimension { index, expected: pts.dim(), got: lag.len() });
            }
            let pairs: Vec<(usize, usize)> = (0..pts.len())
                .flat_map(|a| (0..pts.len()).map(move |b| (a, b)))
                .filter(|&(a, b)| pts.point(a).iter().zip(pts.point(b)).zip(lag).all(|((xa, xb), h)| (xa - xb - h).abs() <= tolerance_radius))
                .collect();
            Ok(bin(reals, lag, &pairs, m, n_batches))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(EmpiricalPcv { m, n_real: reals.len(), n_batches, bins })
}

fn bin(reals: &[Realization], lag: &[f64], pairs: &[(usize, usize)], m: usize, n_batches: usize) -> LagBin {
    if pairs.is_empty() {
        return LagBin { lag: lag.to_vec(), pairs: 0, estimate: None, std_error: None };
    }
    let batch_estimate = |chunk: &[Realization]| {
        Mat::from_fn(m, m, |i, j| {
            let mut s = CompensatedSum::default();
            for r in chunk {
                for &(a, b) in pairs {
                    let d = r.values[(a, i)] - r.values[(b, j)];
                    s.add(d * d);
                }
            }
            s.value() / (2.0 * pairs.len() as f64 * chunk.len() as f64)
        })
    };
    let estimate = batch_estimate(reals);
    let std_error = (n_batches >= 2).then(|| {
        let bounds: Vec<usize> = (0..=n_batches).map(|b| b * reals.len() / n_batches).collect();
        let batches: Vec<Mat> = bounds.windows(2).map(|w| batch_estimate(&reals[w[0]..w[1]])).collect();
        let k = batches.len() as f64;
        let mean = batches.iter().fold(Mat::zeros(m, m), |acc, b| acc + b) / k;
        let var = batches.iter().fold(Mat::zeros(m, m), |acc, b| acc + (b - &mean).map(|v| v * v)) / (k - 1.0);
        var.map(|v| (v / k).sqrt())
    });
    LagBin { lag: lag.to_vec(), pairs: pairs.len(), estimate: Some(estimate), std_error }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{constant, covariance, scale, CovShape};

    fn line(n: usize) -> PointSet {
        PointSet::new(1, 0, (0..n).map(|i| i as f64 * 0.25).collect()).unwrap()
    }

    #[test]
    fn constant_kernel_shares_one_value() {
        let k = constant(2, 1, 4.0).unwrap();
        let reals = sample_gaussian(&k, &line(5), 3, 9, false).unwrap();
        for r in &reals {
            let v = r.values[(0, 0)];
            assert!(r.values.iter().all(|x| (x - v).abs() < 1e-3 * v.abs().max(1.0)));
        }
    }

    #[test]
    fn single_point_variance() {
        let sigma2 = 2.5;
        let k = scale(&covariance(1, 1, CovShape::Exponential, 1.0, None).unwrap(), sigma2).unwrap();
        let pts = PointSet::new(1, 0, vec![0.0]).unwrap();
        let n = 10_000;
        let reals = sample_gaussian(&k, &pts, n, 3, false).unwrap();
        let var = reals.iter().map(|r| r.values[(0, 0)].powi(2)).sum::<f64>() / n as f64;
        // Var of the estimator is 2 sigma^4 / n.
        let sd = (2.0 / n as f64).sqrt() * sigma2;
        assert!((var - sigma2).abs() < 3.0 * sd, "{var}");
    }

    #[test]
    fn seeds_are_deterministic_and_streams_independent() {
        let k = covariance(2, 1, CovShape::Gaussian, 1.0, None).unwrap();
        let a = sample_gaussian(&k, &line(6), 4, 77, false).unwrap();
        let b = sample_gaussian(&k, &line(6), 4, 77, false).unwrap();
        assert_eq!(a, b);
        let single = sample_gaussian(&k, &line(6), 3, 77, false).unwrap();
        assert_eq!(single[2].values, a[2].values);
        assert_ne!(a[0].values, a[1].values);
    }

    #[test]
    fn indefinite_kernel_rejected_unless_forced() {
        let k = crate::kernel::FnKernel::new(1, 1, |x: &[f64], y: &[f64]| Mat::from_element(1, 1, 1.0 - (x[0] - y[0]).abs()));
        let pts = PointSet::new(1, 0, vec![0.0, 1.5, 3.0]).unwrap();
        assert!(matches!(sample_gaussian(&k, &pts, 1, 0, false), Err(SimulationError::NotPsd { .. })));
        assert!(sample_gaussian(&k, &pts, 1, 0, true).is_err());
    }

    #[test]
    fn zero_lag_diagonal_and_scaling() {
        let k = covariance(2, 1, CovShape::Exponential, 1.0, None).unwrap();
        let reals = sample_gaussian(&k, &line(16), 40, 5, false).unwrap();
        let lags = vec![vec![0.0], vec![0.25], vec![-0.25], vec![0.1]];
        let e = empirical_pcv(&reals, &lags, 1e-9, 4).unwrap();
        let z = e.bins[0].estimate.as_ref().unwrap();
        assert_eq!(z[(0, 0)], 0.0);
        assert_eq!(z[(1, 1)], 0.0);
        assert_eq!(e.bins[3].pairs, 0);
        assert!(e.bins[3].estimate.is_none());
        // Exchange: gamma_12(h) and gamma_21(-h) sum the same squares.
        let (p, q) = (e.bins[1].estimate.as_ref().unwrap(), e.bins[2].estimate.as_ref().unwrap());
        assert!((p[(0, 1)] - q[(1, 0)]).abs() < 1e-12 * p[(0, 1)]);
        // Common random numbers: scaling by c^2 scales the estimate exactly.
        let k4 = scale(&k, 4.0).unwrap();
        let reals4 = sample_gaussian(&k4, &line(16), 40, 5, false).unwrap();
        let e4 = empirical_pcv(&reals4, &lags, 1e-9, 4).unwrap();
        let (a, b) = (e.bins[1].estimate.as_ref().unwrap(), e4.bins[1].estimate.as_ref().unwrap());
        assert!((b - a * 4.0).amax() < 1e-9 * b.amax());
    }

    #[test]
    fn theory_matches_definition() {
        let k = covariance(2, 1, CovShape::Exponential, 1.0, None).unwrap();
        let g = theoretical_pcv(&k, &[0.5]).unwrap();
        assert!((g[(0, 0)] - (1.0 - (-0.5f64).exp())).abs() < 1e-15);
        assert!((g[(0, 1)] - 1.0).abs() < 1e-15);
    }
}
