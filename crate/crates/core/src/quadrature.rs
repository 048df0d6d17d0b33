//! Gauss-Legendre rules on finite intervals.

use std::f64::consts::PI;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[a, b]`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    assert!(n >= 1, "rule needs at least one node");
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut out = vec![(0.0, 0.0); n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        out[i] = (mid - half * z, half * w);
        out[n - 1 - i] = (mid + half * z, half * w);
    }
    out
}

/// `(P_n(z), P_n'(z))` by the three-term recurrence.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// `int_a^b f` with a composite rule of `panels` pieces of order `n`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize, panels: usize) -> f64 {
    let width = (b - a) / panels as f64;
    (0..panels)
        .map(|p| {
            let lo = a + p as f64 * width;
            gauss_legendre(n, lo, lo + width).into_iter().map(|(x, w)| w * f(x)).sum::<f64>()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exactness() {
        let rule = gauss_legendre(5, -1.0, 2.0);
        let s: f64 = rule.iter().map(|(x, w)| w * x.powi(9)).sum();
        assert!((s - (2f64.powi(10) - 1.0) / 10.0).abs() < 1e-11);
        let total: f64 = rule.iter().map(|(_, w)| w).sum();
        assert!((total - 3.0).abs() < 1e-14);
    }

    #[test]
    fn smooth_integral() {
        let v = integrate(|x| (-x).exp(), 0.0, 3.0, 20, 4);
        assert!((v - (1.0 - (-3.0f64).exp())).abs() < 1e-14);
    }
}
