use super::{require_same_shape, Component, Derivatives, KernelKind, KernelSpec, Mat, RadialProfile};
use crate::error::KernelError;

/// Entrywise sum of children.
#[derive(Debug, Clone, PartialEq)]
pub struct SumKernel {
    pub children: Vec<KernelSpec>,
}

/// Entrywise (Schur) product of children.
#[derive(Debug, Clone, PartialEq)]
pub struct SchurKernel {
    pub children: Vec<KernelSpec>,
}

/// `factor * K` with `factor > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledKernel {
    pub factor: f64,
    pub child: KernelSpec,
}

/// `K + offset * 1 1^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftedKernel {
    pub offset: f64,
    pub child: KernelSpec,
}

pub fn combine_sum(children: &[KernelSpec]) -> Result<KernelSpec, KernelError> {
    require_same_shape("sum", &children.iter().collect::<Vec<_>>())?;
    Ok(KernelSpec::new(SumKernel { children: children.to_vec() }))
}

pub fn combine_schur(children: &[KernelSpec]) -> Result<KernelSpec, KernelError> {
    require_same_shape("schur_product", &children.iter().collect::<Vec<_>>())?;
    Ok(KernelSpec::new(SchurKernel { children: children.to_vec() }))
}

pub fn scale(child: &KernelSpec, factor: f64) -> Result<KernelSpec, KernelError> {
    super::require_positive("scale", "factor", factor)?;
    Ok(KernelSpec::new(ScaledKernel { factor, child: child.clone() }))
}

pub fn constant_shift(child: &KernelSpec, offset: f64) -> Result<KernelSpec, KernelError> {
    if !offset.is_finite() {
        return Err(KernelError::param("constant_shift", "offset must be finite"));
    }
    Ok(KernelSpec::new(ShiftedKernel { offset, child: child.clone() }))
}

fn all_derivs(children: &[KernelSpec], x: &[f64], y: &[f64], axis: usize) -> Option<Result<Vec<Derivatives>, KernelError>> {
    children.iter().map(|c| c.derivatives(x, y, axis)).collect::<Option<Vec<_>>>().map(|v| v.into_iter().collect())
}

fn all_radial(children: &[KernelSpec], t: f64) -> Option<Result<Vec<RadialProfile>, KernelError>> {
    children.iter().map(|c| c.radial(t)).collect::<Option<Vec<_>>>().map(|v| v.into_iter().collect())
}

impl Component for SumKernel {
    fn op(&self) -> &'static str {
        "sum"
    }
    fn m(&self) -> usize {
        self.children[0].m()
    }
    fn dim(&self) -> usize {
        self.children[0].dim()
    }
    fn kind(&self) -> KernelKind {
        KernelKind::cone(self.children.iter().map(KernelSpec::kind))
    }
    fn stationary(&self) -> bool {
        self.children.iter().all(KernelSpec::is_stationary)
    }
    fn eval(&self, x: &[f64], y: &[f64]) -> Result<Mat, KernelError> {
        let mut acc = self.children[0].eval(x, y)?;
        for c in &self.children[1..] {
            acc += c.eval(x, y)?;
        }
        Ok(acc)
    }
    fn children(&self) -> Vec<&KernelSpec> {
        self.children.iter().collect()
    }
    fn derivatives(&self, x: &[f64], y: &[f64], axis: usize) -> Option<Result<Derivatives, KernelError>> {
        let parts = all_derivs(&self.children, x, y, axis)?;
        Some(parts.map(|v| {
            v.into_iter()
                .reduce(|a, b| Derivatives { value: a.value + b.value, first: a.first + b.first, second: a.second + b.second })
                .expect("non-empty")
        }))
    }
    fn has_derivatives(&self, axis: usize) -> bool {
        self.children.iter().all(|c| c.has_derivatives(axis))
    }
    fn radial(&self, t: f64) -> Option<Result<RadialProfile, KernelError>> {
        let parts = all_radial(&self.children, t)?;
        Some(parts.map(|v| v.into_iter().reduce(|a, b| RadialProfile { value: a.value + b.value, slope: a.slope + b.slope }).expect("non-empty")))
    }
    fn has_radial(&self) -> bool {
        self.children.iter().all(KernelSpec::has_radial)
    }
}

impl Component for SchurKernel {
    fn op(&self) -> &'static str {
        "schur_product"
    }
    fn m(&self) -> usize {
        self.children[0].m()
    }
    fn dim(&self) -> usize {
        self.children[0].dim()
    }
    fn kind(&self) -> KernelKind {
        KernelKind::schur(self.children.iter().map(KernelSpec::kind))
    }
    fn stationary(&self) -> bool {
        self.children.iter().all(KernelSpec::is_stationary)
    }
    fn eval(&self, x: &[f64], y: &[f64]) -> Result<Mat, KernelError> {
        let mut acc = self.children[0].eval(x, y)?;
        for c in &self.children[1..] {
            acc.component_mul_assign(&c.eval(x, y)?);
        }
        Ok(acc)
    }
    fn children(&self) -> Vec<&KernelSpec> {
        self.children.iter().collect()
    }
    fn derivatives(&self, x: &[f64], y: &[f64], axis: usize) -> Option<Result<Derivatives, KernelError>> {
        let parts = all_derivs(&self.children, x, y, axis)?;
        Some(parts.map(|v| {
            v.into_iter()
                .reduce(|f, g| Derivatives {
                    value: f.value.component_mul(&g.value),
                    first: f.first.component_mul(&g.value) + f.value.component_mul(&g.first),
                    second: f.second.component_mul(&g.value) + f.first.component_mul(&g.first) * 2.0 + f.value.component_mul(&g.second),
                })
                .expect("non-empty")
        }))
    }
    fn has_derivatives(&self, axis: usize) -> bool {
        self.children.iter().all(|c| c.has_derivatives(axis))
    }
    fn radial(&self, t: f64) -> Option<Result<RadialProfile, KernelError>> {
        let parts = all_radial(&self.children, t)?;
        Some(parts.map(|v| {
            v.into_iter()
                .reduce(|f, g| RadialProfile {
                    value: f.value.component_mul(&g.value),
                    slope: f.slope.component_mul(&g.value) + f.value.component_mul(&g.slope),
                })
                .expect("non-empty")
        }))
    }
    fn has_radial(&self) -> bool {
        self.children.iter().all(KernelSpec::has_radial)
    }
}

impl Component for ScaledKernel {
    fn op(&self) -> &'static str {
        "scale"
    }
    fn m(&self) -> usize {
        self.child.m()
    }
    fn dim(&self) -> usize {
        self.child.dim()
    }
    fn kind(&self) -> KernelKind {
        self.child.kind()
    }
    fn stationary(&self) -> bool {
        self.child.is_stationary()
    }
    fn eval(&self, x: &[f64], y: &[f64]) -> Result<Mat, KernelError> {
        Ok(self.child.eval(x, y)? * self.factor)
    }
    fn children(&self) -> Vec<&KernelSpec> {
        vec![&self.child]
    }
    fn derivatives(&self, x: &[f64], y: &[f64], axis: usize) -> Option<Result<Derivatives, KernelError>> {
        let c = self.factor;
        Some(self.child.derivatives(x, y, axis)?.map(|d| Derivatives { value: d.value * c, first: d.first * c, second: d.second * c }))
    }
    fn has_derivatives(&self, axis: usize) -> bool {
        self.child.has_derivatives(axis)
    }
    fn radial(&self, t: f64) -> Option<Result<RadialProfile, KernelError>> {
        let c = self.factor;
        Some(self.child.radial(t)?.map(|r| RadialProfile { value: r.value * c, slope: r.slope * c }))
    }
    fn has_radial(&self) -> bool {
        self.child.has_radial()
    }
}

impl Component for ShiftedKernel {
    fn op(&self) -> &'static str {
        "constant_shift"
    }
    fn m(&self) -> usize {
        self.child.m()
    }
    fn dim(&self) -> usize {
        self.child.dim()
    }
    fn kind(&self) -> KernelKind {
        let k = self.child.kind();
        KernelKind {
            positive_definite: k.positive_definite && self.offset >= 0.0,
            conditionally_negative_definite: k.conditionally_negative_definite,
            pseudo_variogram: k.pseudo_variogram && self.offset == 0.0,
            cross_variogram: k.cross_variogram && self.offset == 0.0,
        }
    }
    fn stationary(&self) -> bool {
        self.child.is_stationary()
    }
    fn eval(&self, x: &[f64], y: &[f64]) -> Result<Mat, KernelError> {
        Ok(self.child.eval(x, y)?.add_scalar(self.offset))
    }
    fn children(&self) -> Vec<&KernelSpec> {
        vec![&self.child]
    }
    fn derivatives(&self, x: &[f64], y: &[f64], axis: usize) -> Option<Result<Derivatives, KernelError>> {
        let c = self.offset;
        Some(self.child.derivatives(x, y, axis)?.map(|d| Derivatives { value: d.value.add_scalar(c), ..d }))
    }
    fn has_derivatives(&self, axis: usize) -> bool {
        self.child.has_derivatives(axis)
    }
    fn radial(&self, t: f64) -> Option<Result<RadialProfile, KernelError>> {
        let c = self.offset;
        Some(self.child.radial(t)?.map(|r| RadialProfile { value: r.value.add_scalar(c), ..r }))
    }
    fn has_radial(&self) -> bool {
        self.child.has_radial()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{constant, covariance, CovShape};
    use crate::pcv::pcv_power;

    #[test]
    fn claim_propagation() {
        let a = covariance(1, 1, CovShape::Exponential, 1.0, None).unwrap();
        let b = covariance(1, 1, CovShape::Gaussian, 2.0, None).unwrap();
        assert!(combine_schur(&[a.clone(), b.clone()]).unwrap().kind().is_pd());
        assert!(combine_sum(&[a.clone(), b]).unwrap().kind().is_pd());
        assert!(scale(&a, 3.0).unwrap().kind().is_pd());

        let g1 = pcv_power(1, 1, 1.0, 1.0, None).unwrap();
        let g2 = pcv_power(1, 1, 2.0, 0.5, None).unwrap();
        assert!(combine_sum(&[g1.clone(), g2.clone()]).unwrap().kind().is_pcv());
        assert!(scale(&g1, 0.2).unwrap().kind().is_pcv());
        assert!(combine_schur(&[g1, g2]).unwrap().kind().is_unvalidated());
    }

    #[test]
    fn shape_and_range_errors() {
        let a = constant(1, 1, 1.0).unwrap();
        let b = constant(2, 1, 1.0).unwrap();
        assert!(matches!(combine_sum(&[a.clone(), b]), Err(KernelError::Shape { .. })));
        assert!(scale(&a, 0.0).is_err());
        assert!(scale(&a, -1.0).is_err());
    }

    #[test]
    fn shift_keeps_pd_for_nonnegative_offset() {
        let a = covariance(2, 1, CovShape::Exponential, 1.0, None).unwrap();
        assert!(constant_shift(&a, 0.3).unwrap().kind().is_pd());
        assert!(!constant_shift(&a, -0.3).unwrap().kind().is_pd());
        let v = constant_shift(&a, 0.3).unwrap().evaluate(&[0.0], &[0.0]).unwrap();
        assert_eq!(v[(0, 1)], 0.3);
    }
}
