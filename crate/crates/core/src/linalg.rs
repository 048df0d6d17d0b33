//! Dense symmetric matrices, eigenvalue certificates and jittered Cholesky.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix has non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("matrix order must be at least 1")]
    Empty,
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not positive semidefinite: min eigenvalue {min_eigenvalue:.6e}, last jitter tried {last_jitter:.3e}")]
    NotPositiveSemidefinite { min_eigenvalue: f64, last_jitter: f64 },
    #[error("invalid jitter schedule: {0}")]
    Schedule(&'static str),
}

/// Dense real symmetric matrix; `get(i, j) == get(j, i)` holds bitwise.
/// Serialized as a list of rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct SymMatrix {
    data: DMatrix<f64>,
}

impl SymMatrix {
    /// Symmetrizes by averaging mirrored entries.
    pub fn new(mut data: DMatrix<f64>) -> Result<Self, LinalgError> {
        let (rows, cols) = data.shape();
        if rows != cols {
            return Err(LinalgError::NotSquare { rows, cols });
        }
        if rows == 0 {
            return Err(LinalgError::Empty);
        }
        for i in 0..rows {
            for j in (i + 1)..rows {
                let avg = 0.5 * (data[(i, j)] + data[(j, i)]);
                data[(i, j)] = avg;
                data[(j, i)] = avg;
            }
        }
        Ok(Self { data })
    }

    pub fn from_fn(order: usize, f: impl FnMut(usize, usize) -> f64) -> Result<Self, LinalgError> {
        Self::new(DMatrix::from_fn(order, order, f))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, LinalgError> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(LinalgError::NotSquare { rows: n, cols: bad.len() });
        }
        Self::from_fn(n, |i, j| rows[i][j])
    }

    pub fn identity(order: usize) -> Result<Self, LinalgError> {
        Self::new(DMatrix::identity(order, order))
    }

    pub fn order(&self) -> usize {
        self.data.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.order()).map(|i| self.data.row(i).iter().copied().collect()).collect()
    }

    pub fn trace(&self) -> f64 {
        self.data.trace()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    fn check_finite(&self) -> Result<(), LinalgError> {
        let n = self.order();
        for j in 0..n {
            for i in 0..n {
                if !self.data[(i, j)].is_finite() {
                    return Err(LinalgError::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(())
    }
}

impl TryFrom<Vec<Vec<f64>>> for SymMatrix {
    type Error = LinalgError;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self, Self::Error> {
        let m = Self::from_rows(&rows)?;
        m.check_finite()?;
        Ok(m)
    }
}

impl From<SymMatrix> for Vec<Vec<f64>> {
    fn from(m: SymMatrix) -> Self {
        m.to_rows()
    }
}

/// Extreme-eigenvalue summary of a symmetric matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenResult {
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    /// Scale reference `max |lambda|`.
    pub max_abs_eigenvalue: f64,
}

/// Eigen-decomposition sorted ascending.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    /// Column `k` is the unit eigenvector of `values[k]`.
    pub vectors: DMatrix<f64>,
}

impl Spectrum {
    pub fn summary(&self) -> EigenResult {
        let min = self.values[0];
        let max = *self.values.last().expect("non-empty spectrum");
        EigenResult { min_eigenvalue: min, max_eigenvalue: max, max_abs_eigenvalue: min.abs().max(max.abs()) }
    }

    pub fn vector(&self, k: usize) -> DVector<f64> {
        self.vectors.column(k).into_owned()
    }
}

pub fn spectrum(m: &SymMatrix) -> Result<Spectrum, LinalgError> {
    m.check_finite()?;
    let eig = SymmetricEigen::new(m.data.clone());
    let n = m.order();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, c| eig.eigenvectors[(i, order[c])]);
    Ok(Spectrum { values, vectors })
}

pub fn min_eigenvalue(m: &SymMatrix) -> Result<EigenResult, LinalgError> {
    Ok(spectrum(m)?.summary())
}

/// Lower-triangular factor with the diagonal shift that made it succeed.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    pub lower: DMatrix<f64>,
    pub jitter: f64,
}

/// Jitter schedule `0, start, start*growth, ...` with `max_tries` non-zero shifts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JitterSchedule {
    pub start: f64,
    pub growth: f64,
    pub max_tries: usize,
}

impl JitterSchedule {
    /// `start = 1e-10 * trace/order`, growth 10, 8 tries.
    pub fn default_for(m: &SymMatrix) -> Self {
        let mean_diag = m.trace() / m.order() as f64;
        let start = if mean_diag > 0.0 && mean_diag.is_finite() { 1e-10 * mean_diag } else { 1e-10 };
        Self { start, growth: 10.0, max_tries: 8 }
    }
}

pub fn cholesky_jittered(m: &SymMatrix, jitter_start: f64, jitter_growth: f64, max_tries: usize) -> Result<CholeskyFactor, LinalgError> {
    if !(jitter_start > 0.0) {
        return Err(LinalgError::Schedule("jitter_start must be positive"));
    }
    if !(jitter_growth > 1.0) {
        return Err(LinalgError::Schedule("jitter_growth must exceed 1"));
    }
    m.check_finite()?;
    let n = m.order();
    let mut jitter = 0.0;
    let mut next = jitter_start;
    for attempt in 0..=max_tries {
        let mut shifted = m.data.clone();
        for i in 0..n {
            shifted[(i, i)] += jitter;
        }
        if let Some(ch) = nalgebra::Cholesky::new(shifted) {
            return Ok(CholeskyFactor { lower: ch.l(), jitter });
        }
        if attempt < max_tries {
            jitter = next;
            next *= jitter_growth;
        }
    }
    let min = min_eigenvalue(m)?.min_eigenvalue;
    Err(LinalgError::NotPositiveSemidefinite { min_eigenvalue: min, last_jitter: jitter })
}

pub fn cholesky_default(m: &SymMatrix) -> Result<CholeskyFactor, LinalgError> {
    let s = JitterSchedule::default_for(m);
    cholesky_jittered(m, s.start, s.growth, s.max_tries)
}

/// `(log det, A^{-1} b)` for a positive definite `a` via an unjittered Cholesky.
pub fn spd_logdet_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<(f64, DVector<f64>)> {
    let ch = nalgebra::Cholesky::new(a.clone())?;
    let logdet = 2.0 * ch.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    Some((logdet, ch.solve(b)))
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Determinant by Gaussian elimination with partial pivoting.
    fn det(mut a: Vec<Vec<f64>>) -> f64 {
        let n = a.len();
        let mut d = 1.0;
        for c in 0..n {
            let p = (c..n).max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs())).unwrap();
            if a[p][c] == 0.0 {
                return 0.0;
            }
            if p != c {
                a.swap(p, c);
                d = -d;
            }
            d *= a[c][c];
            for r in (c + 1)..n {
                let f = a[r][c] / a[c][c];
                for k in c..n {
                    a[r][k] -= f * a[c][k];
                }
            }
        }
        d
    }

    fn char_poly(rows: &[Vec<f64>], lambda: f64) -> f64 {
        let mut a = rows.to_vec();
        for (i, r) in a.iter_mut().enumerate() {
            r[i] -= lambda;
        }
        det(a)
    }

    #[test]
    fn trivial_spectra() {
        let id = SymMatrix::identity(5).unwrap();
        assert!((min_eigenvalue(&id).unwrap().min_eigenvalue - 1.0).abs() < 1e-14);
        let ones = SymMatrix::from_fn(3, |_, _| 1.0).unwrap();
        let r = min_eigenvalue(&ones).unwrap();
        assert!(r.min_eigenvalue.abs() < 1e-14);
        assert!((r.max_abs_eigenvalue - 3.0).abs() < 1e-14);
    }

    #[test]
    fn min_eigenvalue_matches_bisection_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let rows: Vec<Vec<f64>> = (0..6).map(|_| (0..6).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
            let m = SymMatrix::from_rows(&rows).unwrap();
            let sym = m.to_rows();
            let r = min_eigenvalue(&m).unwrap();
            // Gershgorin lower bound brackets the smallest root from below.
            let mut lo =
                (0..6).map(|i| sym[i][i] - (0..6).filter(|&j| j != i).map(|j| sym[i][j].abs()).sum::<f64>()).fold(f64::INFINITY, f64::min) - 1.0;
            let mut hi = r.min_eigenvalue + 1e-6;
            // det(M - lambda I) keeps the sign of (+1)^6 left of the smallest root.
            assert!(char_poly(&sym, lo) > 0.0);
            assert!(char_poly(&sym, hi) < 0.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if char_poly(&sym, mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            assert!((0.5 * (lo + hi) - r.min_eigenvalue).abs() < 1e-8);
        }
    }

    #[test]
    fn shift_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = SymMatrix::from_fn(7, |_, _| rng.random_range(-2.0..2.0)).unwrap();
        let base = min_eigenvalue(&m).unwrap();
        for &c in &[-3.0, 0.5, 10.0] {
            let shifted = SymMatrix::from_fn(7, |i, j| m.get(i, j) + if i == j { c } else { 0.0 }).unwrap();
            let r = min_eigenvalue(&shifted).unwrap();
            assert!((r.min_eigenvalue - base.min_eigenvalue - c).abs() < 1e-9 * r.max_abs_eigenvalue);
        }
    }

    #[test]
    fn symmetrized_exactly() {
        let m = SymMatrix::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.3, 2.0])).unwrap();
        assert_eq!(m.get(0, 1), m.get(1, 0));
        assert_eq!(m.get(0, 1), 0.2);
    }

    #[test]
    fn non_finite_rejected() {
        let m = SymMatrix::from_fn(2, |i, j| if i == j { f64::NAN } else { 0.0 }).unwrap();
        assert!(matches!(min_eigenvalue(&m), Err(LinalgError::NonFinite { .. })));
    }

    #[test]
    fn cholesky_cases() {
        let id = SymMatrix::identity(4).unwrap();
        let f = cholesky_default(&id).unwrap();
        assert_eq!(f.jitter, 0.0);
        assert_eq!(f.lower, DMatrix::identity(4, 4));

        let ones = SymMatrix::from_fn(3, |_, _| 1.0).unwrap();
        let s = JitterSchedule::default_for(&ones);
        let f = cholesky_jittered(&ones, s.start, s.growth, s.max_tries).unwrap();
        assert!(f.jitter <= s.start);
        let rec = &f.lower * f.lower.transpose();
        let mut target = ones.as_matrix().clone();
        for i in 0..3 {
            target[(i, i)] += f.jitter;
        }
        assert!((rec - target).amax() <= 1e-9 * ones.max_abs_entry());

        // Spectral synthesis: Q diag(-0.5, 1, 2) Q^T with a Householder Q.
        let v = DVector::from_vec(vec![1.0, 2.0, -1.0]).normalize();
        let q: DMatrix<f64> = DMatrix::identity(3, 3) - 2.0 * &v * v.transpose();
        let m = SymMatrix::new(&q * DMatrix::from_diagonal(&DVector::from_vec(vec![-0.5, 1.0, 2.0])) * q.transpose()).unwrap();
        match cholesky_jittered(&m, 1e-6, 10.0, 4) {
            Err(LinalgError::NotPositiveSemidefinite { min_eigenvalue, last_jitter }) => {
                assert!((min_eigenvalue + 0.5).abs() < 1e-12);
                assert!(last_jitter < 0.5);
            }
            other => panic!("expected failure, got {other:?}"),
        }
    }
}
