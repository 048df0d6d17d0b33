use serde::{Deserialize, Serialize};

/// Real-valued function of location from a small parametric whitelist.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScalarField {
    Constant {
        value: f64,
    },
    /// `intercept + slope . x`
    Affine {
        intercept: f64,
        slope: Vec<f64>,
    },
    /// `intercept + coef * |x|^2`
    Quadratic {
        intercept: f64,
        coef: f64,
    },
}

impl ScalarField {
    pub fn constant(value: f64) -> Self {
        Self::Constant { value }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            Self::Constant { value } => *value,
            Self::Affine { intercept, slope } => intercept + slope.iter().zip(x).map(|(a, b)| a * b).sum::<f64>(),
            Self::Quadratic { intercept, coef } => intercept + coef * x.iter().map(|a| a * a).sum::<f64>(),
        }
    }

    /// `(value, d/dx_axis, d^2/dx_axis^2)`.
    pub fn partials(&self, x: &[f64], axis: usize) -> (f64, f64, f64) {
        let v = self.value(x);
        match self {
            Self::Constant { .. } => (v, 0.0, 0.0),
            Self::Affine { slope, .. } => (v, slope.get(axis).copied().unwrap_or(0.0), 0.0),
            Self::Quadratic { coef, .. } => (v, 2.0 * coef * x[axis], 2.0 * coef),
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            Self::Constant { .. } => true,
            Self::Affine { slope, .. } => slope.iter().all(|s| *s == 0.0),
            Self::Quadratic { coef, .. } => *coef == 0.0,
        }
    }

    /// Coordinates the field reads; `None` if it accepts any dimension.
    pub fn required_dim(&self) -> Option<usize> {
        match self {
            Self::Affine { slope, .. } => Some(slope.len()),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            Self::Constant { value } => value.is_finite(),
            Self::Affine { intercept, slope } => intercept.is_finite() && slope.iter().all(|s| s.is_finite()),
            Self::Quadratic { intercept, coef } => intercept.is_finite() && coef.is_finite(),
        }
    }
}
