//! Numerical certification of definiteness claims on finite point sets.
//!
//! Every check draws `n_configs` stratified random configurations from a
//! seeded stream, assembles the block Gram matrix and inspects its spectrum.
//! A pass certifies the tested configurations only.

use nalgebra::DVector;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::KernelError;
use crate::kernel::{assemble_gram, Mat, MatrixKernel, PointSet};
use crate::linalg::{spectrum, SymMatrix};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("tol_rel must be positive and finite, got {0}")]
    Tolerance(f64),
    #[error("n_points_max must be at least 2, got {0}")]
    TooFewPoints(usize),
    #[error("n_configs must be positive")]
    NoConfigs,
    #[error("domain box has {got} coordinates, kernel expects {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("domain box needs finite lower < upper in every coordinate")]
    Box,
    #[error("dim_time = {dim_time} leaves no spatial coordinate in a {dim}-dimensional box")]
    NoSpace { dim: usize, dim_time: usize },
}

/// Axis-aligned sampling box; the last `dim_time` coordinates are temporal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    #[serde(default)]
    pub dim_time: usize,
}

impl DomainBox {
    pub fn cube(dim: usize, lower: f64, upper: f64) -> Self {
        Self { lower: vec![lower; dim], upper: vec![upper; dim], dim_time: 0 }
    }

    pub fn with_time(mut self, dim_time: usize) -> Self {
        self.dim_time = dim_time;
        self
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    fn clamp(&self, axis: usize, v: f64) -> f64 {
        v.clamp(self.lower[axis], self.upper[axis])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationConfig {
    pub n_configs: usize,
    pub n_points_max: usize,
    /// Tolerance relative to the largest absolute eigenvalue of the Gram matrix.
    pub tol_rel: f64,
    pub rng_seed: u64,
    pub domain_box: DomainBox,
}

impl ValidationConfig {
    /// 20 configurations of at most 12 points in `[-2, 2]^dim`.
    pub fn new(dim: usize) -> Self {
        Self { n_configs: 20, n_points_max: 12, tol_rel: 1e-8, rng_seed: 0, domain_box: DomainBox::cube(dim, -2.0, 2.0) }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn configs(mut self, n_configs: usize, n_points_max: usize) -> Self {
        self.n_configs = n_configs;
        self.n_points_max = n_points_max;
        self
    }

    pub fn tol(mut self, tol_rel: f64) -> Self {
        self.tol_rel = tol_rel;
        self
    }

    pub fn domain(mut self, domain_box: DomainBox) -> Self {
        self.domain_box = domain_box;
        self
    }

    pub fn validate(&self, kernel_dim: usize) -> Result<(), ConfigError> {
        if !(self.tol_rel > 0.0) || !self.tol_rel.is_finite() {
            return Err(ConfigError::Tolerance(self.tol_rel));
        }
        if self.n_points_max < 2 {
            return Err(ConfigError::TooFewPoints(self.n_points_max));
        }
        if self.n_configs == 0 {
            return Err(ConfigError::NoConfigs);
        }
        let b = &self.domain_box;
        if b.lower.len() != kernel_dim || b.upper.len() != kernel_dim {
            return Err(ConfigError::Dimension { expected: kernel_dim, got: b.lower.len().max(b.upper.len()) });
        }
        if b.lower.iter().zip(&b.upper).any(|(l, u)| !(l < u) || !l.is_finite() || !u.is_finite()) {
            return Err(ConfigError::Box);
        }
        if b.dim_time >= kernel_dim {
            return Err(ConfigError::NoSpace { dim: kernel_dim, dim_time: b.dim_time });
        }
        Ok(())
    }

    /// Configuration `c`: a Latin-hypercube draw of `2..=n_points_max`
    /// points; every tenth configuration repeats its first point last.
    pub fn configuration(&self, c: usize) -> PointSet {
        let mut rng = ChaCha8Rng::seed_from_u64(self.rng_seed);
        rng.set_stream(c as u64);
        let n = rng.random_range(2..=self.n_points_max);
        let b = &self.domain_box;
        let d = b.dim();
        let mut coords = vec![0.0; n * d];
        let mut strata: Vec<usize> = (0..n).collect();
        for a in 0..d {
            strata.shuffle(&mut rng);
            let width = b.upper[a] - b.lower[a];
            for (i, s) in strata.iter().enumerate() {
                let u: f64 = rng.random();
                coords[i * d + a] = b.lower[a] + width * (*s as f64 + u) / n as f64;
            }
        }
        if c % 10 == 9 && n >= 2 {
            let (first, rest) = coords.split_at_mut(d);
            rest[(n - 2) * d..].copy_from_slice(first);
        }
        PointSet::new(d - b.dim_time, b.dim_time, coords).expect("box was validated")
    }

    fn scope(&self) -> String {
        format!(
            "{} configurations of 2..={} points in [{:?}, {:?}] (seed {}); a pass certifies these configurations only",
            self.n_configs, self.n_points_max, self.domain_box.lower, self.domain_box.upper, self.rng_seed
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckMode {
    /// Minimum eigenvalue of the Gram matrix.
    Pd,
    /// Maximum eigenvalue of the Gram matrix projected onto zero-sum coefficients.
    Cnd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

/// Points and unit coefficient vector realizing a violation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub config: usize,
    pub points: PointSet,
    /// Length `n * m`, block ordered like the Gram matrix.
    pub coefficients: Vec<f64>,
    /// `a^T G a` at the witness.
    pub quadratic_form: f64,
    /// Schoenberg parameter, for round-trip checks.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub t: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub mode: CheckMode,
    pub verdict: Verdict,
    /// Minimum eigenvalue (PD) or maximum contrast eigenvalue (CND) of the
    /// worst configuration; `None` if nothing could be evaluated.
    pub worst_value: Option<f64>,
    /// `max |lambda|` of the worst configuration's Gram matrix.
    pub scale: Option<f64>,
    pub configs_checked: usize,
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reason: Option<String>,
    pub errors: Vec<String>,
    pub caveats: Vec<String>,
    pub scope: String,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn failed(&self) -> bool {
        self.verdict == Verdict::Fail
    }
}

/// Spectral summary of one point set.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCheck {
    pub value: f64,
    pub scale: f64,
    pub coefficients: Vec<f64>,
    pub quadratic_form: f64,
}

impl PointCheck {
    /// Signed distance past the tolerance, relative to `scale`; positive is a violation.
    fn excess(&self, mode: CheckMode, tol_rel: f64) -> f64 {
        let s = self.scale.max(f64::MIN_POSITIVE);
        match mode {
            CheckMode::Pd => -self.value / s - tol_rel,
            CheckMode::Cnd => self.value / s - tol_rel,
        }
    }

    fn badness(&self, mode: CheckMode) -> f64 {
        self.excess(mode, 0.0)
    }
}

/// `P = I - e e^T / n`, the orthogonal projector onto zero-sum vectors.
pub fn contrast_projector(n: usize) -> Mat {
    Mat::identity(n, n) - Mat::from_element(n, n, 1.0 / n as f64)
}

/// Eigen-check of `kernel` on `pts` alone; reproduces a witness.
pub fn check_points<K: MatrixKernel + ?Sized>(kernel: &K, pts: &PointSet, mode: CheckMode) -> Result<PointCheck, String> {
    let gram = assemble_gram(kernel, pts).map_err(|e| e.to_string())?;
    spectral_check(&gram.data, mode)
}

fn spectral_check(g: &SymMatrix, mode: CheckMode) -> Result<PointCheck, String> {
    let full = spectrum(g).map_err(|e| e.to_string())?;
    let scale = full.summary().max_abs_eigenvalue;
    match mode {
        CheckMode::Pd => {
            let a = full.vector(0);
            let qf = a.dot(&(g.as_matrix() * &a));
            Ok(PointCheck { value: full.values[0], scale, coefficients: a.as_slice().to_vec(), quadratic_form: qf })
        }
        CheckMode::Cnd => {
            let n = g.order();
            let p = contrast_projector(n);
            let pgp = SymMatrix::new(&p * g.as_matrix() * &p).map_err(|e| e.to_string())?;
            let proj = spectrum(&pgp).map_err(|e| e.to_string())?;
            let top = n - 1;
            let mut a: DVector<f64> = &p * proj.vector(top);
            let norm = a.norm();
            if norm > 0.0 {
                a /= norm;
            }
            let qf = a.dot(&(g.as_matrix() * &a));
            Ok(PointCheck { value: proj.values[top], scale, coefficients: a.as_slice().to_vec(), quadratic_form: qf })
        }
    }
}

struct Outcome {
    config: usize,
    points: PointSet,
    result: Result<PointCheck, String>,
}

fn run_configs<K: MatrixKernel + ?Sized>(kernel: &K, cfg: &ValidationConfig, mode: CheckMode) -> Vec<Outcome> {
    (0..cfg.n_configs)
        .into_par_iter()
        .map(|c| {
            let points = cfg.configuration(c);
            let result = check_points(kernel, &points, mode);
            Outcome { config: c, points, result }
        })
        .collect()
}

fn invalid_config(mode: CheckMode, e: ConfigError) -> ValidationReport {
    ValidationReport {
        mode,
        verdict: Verdict::Inconclusive,
        worst_value: None,
        scale: None,
        configs_checked: 0,
        witness: None,
        reason: Some(format!("invalid configuration: {e}")),
        errors: vec![e.to_string()],
        caveats: Vec::new(),
        scope: String::new(),
    }
}

/// Reduces per-configuration outcomes; the worst configuration is the one
/// with the largest relative excess, ties going to the lowest index.
fn merge(outcomes: Vec<Outcome>, mode: CheckMode, cfg: &ValidationConfig, caveats: Vec<String>, t: Option<f64>) -> ValidationReport {
    let mut errors = Vec::new();
    let mut worst: Option<(usize, PointSet, PointCheck)> = None;
    let mut checked = 0;
    for o in outcomes {
        match o.result {
            Err(e) => errors.push(format!("configuration {}: {e}", o.config)),
            Ok(r) => {
                checked += 1;
                let better = match &worst {
                    None => true,
                    Some((_, _, w)) => r.excess(mode, cfg.tol_rel) > w.excess(mode, cfg.tol_rel),
                };
                if better {
                    worst = Some((o.config, o.points, r));
                }
            }
        }
    }
    let violated = worst.as_ref().is_some_and(|(_, _, w)| w.excess(mode, cfg.tol_rel) > 0.0);
    let verdict = if violated {
        Verdict::Fail
    } else if !errors.is_empty() || worst.is_none() {
        Verdict::Inconclusive
    } else {
        Verdict::Pass
    };
    let reason = match verdict {
        Verdict::Fail => worst.as_ref().map(|(c, _, w)| match mode {
            CheckMode::Pd => format!("configuration {c}: minimum eigenvalue {:.6e} below -tol * {:.6e}", w.value, w.scale),
            CheckMode::Cnd => format!("configuration {c}: contrast eigenvalue {:.6e} above tol * {:.6e}", w.value, w.scale),
        }),
        Verdict::Inconclusive => Some(format!("{} configuration(s) could not be evaluated", errors.len())),
        Verdict::Pass => None,
    };
    let witness = match (&worst, verdict) {
        (Some((c, pts, w)), Verdict::Fail) => {
            Some(Witness { config: *c, points: pts.clone(), coefficients: w.coefficients.clone(), quadratic_form: w.quadratic_form, t })
        }
        _ => None,
    };
    ValidationReport {
        mode,
        verdict,
        worst_value: worst.as_ref().map(|(_, _, w)| w.value),
        scale: worst.as_ref().map(|(_, _, w)| w.scale),
        configs_checked: checked,
        witness,
        reason,
        errors,
        caveats,
        scope: cfg.scope(),
    }
}

fn check<K: MatrixKernel + ?Sized>(kernel: &K, cfg: &ValidationConfig, mode: CheckMode) -> ValidationReport {
    if let Err(e) = cfg.validate(kernel.dim()) {
        return invalid_config(mode, e);
    }
    merge(run_configs(kernel, cfg, mode), mode, cfg, kernel.caveats(), None)
}

/// Minimum eigenvalue of every Gram matrix at least `-tol_rel * scale`.
pub fn check_pd<K: MatrixKernel + ?Sized>(kernel: &K, cfg: &ValidationConfig) -> ValidationReport {
    check(kernel, cfg, CheckMode::Pd)
}

/// Maximum eigenvalue of `P G P` at most `tol_rel * scale`.
pub fn check_cnd<K: MatrixKernel + ?Sized>(kernel: &K, cfg: &ValidationConfig) -> ValidationReport {
    check(kernel, cfg, CheckMode::Cnd)
}

/// Absolute bound for the coincident diagonal and exchange symmetry checks.
pub const EXACT_TOL: f64 = 1e-12;
const DIAGONAL_SAMPLES: usize = 100;

/// CND plus `|gamma_ii(x, x)| <= 1e-12` on 100 random `x` plus
/// `gamma(x, y) = gamma(y, x)^T` on 100 random pairs.
pub fn check_pseudo_variogram<K: MatrixKernel + ?Sized>(kernel: &K, cfg: &ValidationConfig) -> ValidationReport {
    let mut report = check_cnd(kernel, cfg);
    if report.configs_checked == 0 {
        return report;
    }
    let pts = cfg.uniform_points(cfg.rng_seed ^ 0x5eed, DIAGONAL_SAMPLES);
    let partner = cfg.uniform_points(cfg.rng_seed ^ 0xface, DIAGONAL_SAMPLES);
    let m = kernel.m();
    for k in 0..DIAGONAL_SAMPLES {
        let x = pts.point(k);
        let g = match kernel.evaluate(x, x) {
            Ok(g) => g,
            Err(e) => {
                report.errors.push(format!("diagonal sample {k}: {e}"));
                continue;
            }
        };
        if let Some(i) = (0..m).find(|&i| g[(i, i)].abs() > EXACT_TOL) {
            if report.verdict != Verdict::Fail {
                let mut coefficients = vec![0.0; m];
                coefficients[i] = 1.0;
                let single = PointSet::new(pts.dim_space(), pts.dim_time(), x.to_vec()).expect("sampled point");
                report.witness = Some(Witness { config: k, points: single, coefficients, quadratic_form: g[(i, i)], t: None });
                report.reason = Some(format!("coincident diagonal gamma_{i}{i}(x, x) = {:.6e} at x = {x:?}", g[(i, i)]));
                report.verdict = Verdict::Fail;
            }
            return report;
        }
    }
    for k in 0..DIAGONAL_SAMPLES {
        let (x, y) = (pts.point(k), partner.point(k));
        let (a, b) = match (kernel.evaluate(x, y), kernel.evaluate(y, x)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => {
                report.errors.push(format!("symmetry sample {k}: {e}"));
                continue;
            }
        };
        let gap = (&a - b.transpose()).amax();
        if gap > EXACT_TOL * a.amax().max(1.0) {
            if report.verdict != Verdict::Fail {
                report.reason = Some(format!("exchange symmetry broken by {gap:.6e} at x = {x:?}, y = {y:?}"));
                report.verdict = Verdict::Fail;
            }
            return report;
        }
    }
    if report.verdict == Verdict::Pass && !report.errors.is_empty() {
        report.verdict = Verdict::Inconclusive;
        report.reason = Some(format!("{} sample(s) could not be evaluated", report.errors.len()));
    }
    report
}

impl ValidationConfig {
    /// `n` independent uniform points in the box.
    fn uniform_points(&self, seed: u64, n: usize) -> PointSet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = &self.domain_box;
        let d = b.dim();
        let coords = (0..n * d)
            .map(|k| {
                let a = k % d;
                b.lower[a] + (b.upper[a] - b.lower[a]) * rng.random::<f64>()
            })
            .collect();
        PointSet::new(d - b.dim_time, b.dim_time, coords).expect("box was validated")
    }
}

/// `exp(-t gamma)` entrywise.
pub struct SchoenbergMap<'a, K: ?Sized> {
    pub gamma: &'a K,
    pub t: f64,
}

impl<K: MatrixKernel + ?Sized> MatrixKernel for SchoenbergMap<'_, K> {
    fn m(&self) -> usize {
        self.gamma.m()
    }
    fn dim(&self) -> usize {
        self.gamma.dim()
    }
    fn evaluate(&self, x: &[f64], y: &[f64]) -> Result<Mat, KernelError> {
        Ok(self.gamma.evaluate(x, y)?.map(|v| (-self.t * v).exp()))
    }
    fn caveats(&self) -> Vec<String> {
        self.gamma.caveats()
    }
}

/// `check_pd(exp(-t gamma))` for every `t` on the same configurations;
/// the report is the worst over `t`.
pub fn schoenberg_roundtrip<K: MatrixKernel + ?Sized>(gamma: &K, t_grid: &[f64], cfg: &ValidationConfig) -> ValidationReport {
    if t_grid.is_empty() || t_grid.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
        let mut r = invalid_config(CheckMode::Pd, ConfigError::NoConfigs);
        r.reason = Some("t_grid must be non-empty and positive".into());
        r.errors = vec!["invalid t_grid".into()];
        return r;
    }
    if let Err(e) = cfg.validate(gamma.dim()) {
        return invalid_config(CheckMode::Pd, e);
    }
    let mut out: Option<ValidationReport> = None;
    for &t in t_grid {
        let map = SchoenbergMap { gamma, t };
        let r = merge(run_configs(&map, cfg, CheckMode::Pd), CheckMode::Pd, cfg, gamma.caveats(), Some(t));
        let replace = match &out {
            None => true,
            Some(cur) => rank(r.verdict) > rank(cur.verdict),
        };
        if replace {
            out = Some(r);
        }
    }
    let mut out = out.expect("non-empty grid");
    out.scope = format!("t in {t_grid:?}; {}", out.scope);
    if let (Some(w), Some(reason)) = (&out.witness, &mut out.reason) {
        reason.push_str(&format!(" at t = {}", w.t.unwrap_or(f64::NAN)));
    }
    out
}

fn rank(v: Verdict) -> u8 {
    match v {
        Verdict::Pass => 0,
        Verdict::Inconclusive => 1,
        Verdict::Fail => 2,
    }
}

/// Both certificates of conditional negative definiteness and their agreement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub verdict: Verdict,
    pub cnd: ValidationReport,
    pub roundtrip: ValidationReport,
}

/// Agreement of `check_cnd` and `schoenberg_roundtrip` on shared
/// configurations; disagreement is inconclusive, never a silent pass.
pub fn schoenberg_equivalence<K: MatrixKernel + ?Sized>(gamma: &K, t_grid: &[f64], cfg: &ValidationConfig) -> EquivalenceReport {
    let cnd = check_cnd(gamma, cfg);
    let roundtrip = schoenberg_roundtrip(gamma, t_grid, cfg);
    let verdict = match (cnd.verdict, roundtrip.verdict) {
        (Verdict::Pass, Verdict::Pass) => Verdict::Pass,
        (Verdict::Fail, Verdict::Fail) => Verdict::Fail,
        _ => Verdict::Inconclusive,
    };
    EquivalenceReport { verdict, cnd, roundtrip }
}

const DESCENT_SWEEPS: usize = 40;

/// Random search followed by coordinate-wise perturbation descent from the
/// `n_restarts` worst configurations. The objective is the eigenvalue relative
/// to the Gram scale (minimized for PD, maximized for CND); moves are accepted only on strict
/// improvement and stay inside the domain box.
pub fn adversarial_search<K: MatrixKernel + ?Sized>(kernel: &K, cfg: &ValidationConfig, mode: CheckMode, n_restarts: usize) -> ValidationReport {
    if let Err(e) = cfg.validate(kernel.dim()) {
        return invalid_config(mode, e);
    }
    let outcomes = run_configs(kernel, cfg, mode);
    let mut ranked: Vec<(usize, f64)> = outcomes.iter().filter_map(|o| o.result.as_ref().ok().map(|r| (o.config, r.badness(mode)))).collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let starts: Vec<usize> = ranked.iter().take(n_restarts).map(|(c, _)| *c).collect();
    let refined: Vec<(usize, PointSet, PointCheck)> = starts
        .par_iter()
        .filter_map(|&c| {
            let o = outcomes.iter().find(|o| o.config == c)?;
            let start = o.result.as_ref().ok()?.clone();
            Some(descend(kernel, cfg, mode, c, o.points.clone(), start))
        })
        .collect();
    let mut merged = outcomes;
    for (c, pts, r) in refined {
        if let Some(o) = merged.iter_mut().find(|o| o.config == c) {
            o.points = pts;
            o.result = Ok(r);
        }
    }
    let mut report = merge(merged, mode, cfg, kernel.caveats(), None);
    report.scope = format!("{}; refined by descent from {} start(s)", report.scope, n_restarts);
    report
}

fn descend<K: MatrixKernel + ?Sized>(
    kernel: &K,
    cfg: &ValidationConfig,
    mode: CheckMode,
    config: usize,
    mut pts: PointSet,
    mut best: PointCheck,
) -> (usize, PointSet, PointCheck) {
    let b = &cfg.domain_box;
    let d = b.dim();
    let mut step = b.lower.iter().zip(&b.upper).map(|(l, u)| u - l).fold(f64::INFINITY, f64::min) / 8.0;
    for _ in 0..DESCENT_SWEEPS {
        let mut improved = false;
        for i in 0..pts.len() {
            for a in 0..d {
                for sign in [1.0, -1.0] {
                    let old = pts.point(i)[a];
                    let new = b.clamp(a, old + sign * step);
                    if new == old {
                        continue;
                    }
                    pts.point_mut(i)[a] = new;
                    match check_points(kernel, &pts, mode) {
                        Ok(r) if r.badness(mode) > best.badness(mode) => {
                            best = r;
                            improved = true;
                        }
                        _ => pts.point_mut(i)[a] = old,
                    }
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (config, pts, best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{constant, covariance, CovShape, FnKernel};
    use crate::pcv::{pcv_power, power_law};

    fn cfg(dim: usize) -> ValidationConfig {
        ValidationConfig::new(dim).seed(11)
    }

    #[test]
    fn projector_identities() {
        let p = contrast_projector(7);
        assert!((&p * &p - &p).amax() < 1e-15);
        assert!((&p - p.transpose()).amax() == 0.0);
        assert!((&p * DVector::from_element(7, 1.0)).amax() < 1e-15);
    }

    #[test]
    fn configurations_are_stratified_and_reproducible() {
        let c = cfg(2).configs(20, 12);
        let a = c.configuration(3);
        assert_eq!(a, c.configuration(3));
        assert_ne!(a, c.configuration(4));
        // Each stratum of each axis holds exactly one point.
        let n = a.len();
        for axis in 0..2 {
            let mut seen = vec![false; n];
            for p in a.iter() {
                let s = (((p[axis] + 2.0) / 4.0) * n as f64).floor() as usize;
                seen[s.min(n - 1)] = true;
            }
            assert!(seen.iter().all(|s| *s));
        }
        let dup = c.configuration(9);
        assert_eq!(dup.point(0), dup.point(dup.len() - 1));
    }

    #[test]
    fn ones_and_zero() {
        let ones = constant(2, 1, 1.0).unwrap();
        let r = check_pd(&ones, &cfg(1));
        assert!(r.passed(), "{r:?}");
        assert!(r.worst_value.unwrap().abs() < 1e-12);
        let zero = constant(2, 1, 0.0).unwrap();
        let r = check_cnd(&zero, &cfg(1));
        assert!(r.passed() && r.worst_value.unwrap() == 0.0);
        assert!(check_pseudo_variogram(&zero, &cfg(1)).passed());
        assert!(schoenberg_roundtrip(&zero, &[0.5, 3.0], &cfg(1)).passed());
    }

    #[test]
    fn triangle_fails_with_reproducible_witness() {
        // 1 - |h| goes below -1 on a box of width 4.
        let k = FnKernel::new(1, 1, |x: &[f64], y: &[f64]| Mat::from_element(1, 1, 1.0 - (x[0] - y[0]).abs()));
        let r = check_pd(&k, &cfg(1));
        assert!(r.failed());
        let w = r.witness.unwrap();
        let again = check_points(&k, &w.points, CheckMode::Pd).unwrap();
        assert!((again.value - r.worst_value.unwrap()).abs() < 1e-10);
        assert!((w.quadratic_form - again.value).abs() < 1e-10);
    }

    #[test]
    fn classical_power_invalidity() {
        let good = pcv_power(1, 1, 1.0, 1.0, None).unwrap();
        let c = cfg(1).configs(200, 8);
        assert!(check_cnd(&good, &c).passed());
        assert!(check_pd(&crate::stationary::schoenberg_exp(&good, 1.0).unwrap(), &c).passed());
        let bad = power_law(1, 2, 2.5, 1.0, None).unwrap();
        let c2 = cfg(2).configs(200, 8);
        let r = check_cnd(&bad, &c2);
        assert!(r.failed());
        let w = r.witness.as_ref().unwrap();
        assert!(w.coefficients.iter().sum::<f64>().abs() < 1e-10);
        assert!(schoenberg_roundtrip(&bad, &[0.1, 1.0, 10.0], &c2).failed());
        assert_eq!(schoenberg_equivalence(&bad, &[0.1, 1.0, 10.0], &c2).verdict, Verdict::Fail);
    }

    #[test]
    fn diagonal_reason_is_named() {
        // g_i(x) + g_j(y) is CND but not a pseudo cross-variogram.
        let k = FnKernel::new(2, 1, |x: &[f64], y: &[f64]| {
            let g = |i: usize, v: f64| (1.0 + i as f64) * (1.0 + v * v);
            Mat::from_fn(2, 2, |i, j| g(i, x[0]) + g(j, y[0]))
        });
        let c = cfg(1);
        assert!(check_cnd(&k, &c).passed());
        let r = check_pseudo_variogram(&k, &c);
        assert!(r.failed());
        assert!(r.reason.unwrap().contains("coincident diagonal"));
    }

    #[test]
    fn exchange_asymmetry_detected() {
        let k = FnKernel::new(1, 1, |x: &[f64], y: &[f64]| Mat::from_element(1, 1, (x[0] - y[0]).abs() + 0.1 * (x[0] - y[0])));
        let r = check_pseudo_variogram(&k, &cfg(1));
        assert!(r.failed() && r.reason.unwrap().contains("exchange symmetry"));
    }

    #[test]
    fn evaluation_errors_are_inconclusive() {
        let bad = crate::stationary::infdiv_ratio(&constant(1, 1, -1.0).unwrap(), 1.0, 0.0).unwrap();
        let r = check_pd(&bad, &cfg(1));
        assert_eq!(r.verdict, Verdict::Inconclusive);
        assert!(!r.errors.is_empty());
        let r = check_pd(&bad, &cfg(1).tol(0.0));
        assert_eq!(r.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn deterministic_reports() {
        let g = covariance(2, 2, CovShape::Exponential, 1.0, None).unwrap();
        let a = check_pd(&g, &cfg(2));
        let b = check_pd(&g, &cfg(2));
        assert_eq!(a, b);
    }

    #[test]
    fn adversarial_search_improves() {
        let gauss = covariance(1, 1, CovShape::Gaussian, 1.0, None).unwrap();
        let r = adversarial_search(&gauss, &cfg(1).configs(10, 6), CheckMode::Pd, 2);
        assert!(r.worst_value.unwrap() >= -1e-8 * r.scale.unwrap());
        let bad = power_law(1, 2, 2.5, 1.0, None).unwrap();
        let c = cfg(2).configs(50, 8);
        let plain = check_cnd(&bad, &c);
        let refined = adversarial_search(&bad, &c, CheckMode::Cnd, 3);
        let rel = |r: &ValidationReport| r.worst_value.unwrap() / r.scale.unwrap();
        assert!(rel(&refined) > rel(&plain));
        let sine = FnKernel::new(1, 1, |x: &[f64], y: &[f64]| Mat::from_element(1, 1, (x[0] - y[0]).abs().sin()));
        assert!(adversarial_search(&sine, &cfg(1).configs(5, 4), CheckMode::Pd, 1).failed());
    }
}
