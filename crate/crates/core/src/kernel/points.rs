use serde::{Deserialize, Serialize};

use crate::error::KernelError;

/// Ordered locations in `R^d x R^k`, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    dim_space: usize,
    dim_time: usize,
    coords: Vec<f64>,
}

impl PointSet {
    pub fn new(dim_space: usize, dim_time: usize, coords: Vec<f64>) -> Result<Self, KernelError> {
        let dim = dim_space + dim_time;
        if dim_space == 0 {
            return Err(KernelError::param("point_set", "dim_space must be positive"));
        }
        if coords.is_empty() || !coords.len().is_multiple_of(dim) {
            return Err(KernelError::param("point_set", format!("{} coordinates do not form a non-empty set of {dim}-vectors", coords.len())));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(KernelError::param("point_set", "non-finite coordinate"));
        }
        Ok(Self { dim_space, dim_time, coords })
    }

    pub fn from_rows(dim_space: usize, dim_time: usize, rows: &[Vec<f64>]) -> Result<Self, KernelError> {
        let dim = dim_space + dim_time;
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != dim) {
            return Err(KernelError::param("point_set", format!("point {i} has {} coordinates, expected {dim}", r.len())));
        }
        Self::new(dim_space, dim_time, rows.concat())
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.dim_space + self.dim_time
    }

    pub fn dim_space(&self) -> usize {
        self.dim_space
    }

    pub fn dim_time(&self) -> usize {
        self.dim_time
    }

    pub fn point(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.coords[i * d..(i + 1) * d]
    }

    pub fn point_mut(&mut self, i: usize) -> &mut [f64] {
        let d = self.dim();
        &mut self.coords[i * d..(i + 1) * d]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim())
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.iter().map(<[f64]>::to_vec).collect()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }
}
