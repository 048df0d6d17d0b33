//! Special functions: modified Bessel function of the second kind, the
//! exponential integral, and Gamma/Beta.
//!
//! Bessel `K` follows the Temme series for `x < 2` and Steed's continued
//! fraction for `x >= 2`, on an order reduced to `|mu| <= 1/2`, followed by
//! forward recurrence in rescaled arithmetic so large orders at tiny
//! arguments do not overflow before the final exponentiation.

use std::f64::consts::PI;

use thiserror::Error;

/// Failure of a special-function evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecialError {
    #[error("{func}: argument {arg} outside the domain")]
    Domain { func: &'static str, arg: f64 },
    #[error("{func}: result overflows at argument {arg}")]
    Overflow { func: &'static str, arg: f64 },
}

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const EPS: f64 = 1e-16;
const MAX_ITER: usize = 100_000;

/// Taylor coefficients `c_k` of `1/Gamma(z) = sum_k c_k z^k`, `k = 1..=30`.
#[allow(clippy::excessive_precision)]
const RECIP_GAMMA: [f64; 30] = [
    1.0,
    0.577_215_664_901_532_860_606_5,
    -0.655_878_071_520_253_881_077,
    -0.042_002_635_034_095_235_529,
    0.166_538_611_382_291_489_501_7,
    -0.042_197_734_555_544_336_748_21,
    -0.009_621_971_527_876_973_562_115,
    0.007_218_943_246_663_099_542_395,
    -0.001_165_167_591_859_065_112_114,
    -0.000_215_241_674_114_950_972_815_7,
    0.000_128_050_282_388_116_186_153_2,
    -0.000_020_134_854_780_788_238_655_69,
    -0.000_001_250_493_482_142_670_657_345,
    0.000_001_133_027_231_981_695_882_374,
    -2.056_338_416_977_607_103_45e-7,
    6.116_095_104_481_415_817_862e-9,
    5.002_007_644_469_222_930_056e-9,
    -1.181_274_570_487_020_144_588e-9,
    1.043_426_711_691_100_510_492e-10,
    7.782_263_439_905_071_254_05e-12,
    -3.696_805_618_642_205_708_188e-12,
    5.100_370_287_454_475_979_015e-13,
    -2.058_326_053_566_506_783_222e-14,
    -5.348_122_539_423_017_982_37e-15,
    1.226_778_628_238_260_790_159e-15,
    -1.181_259_301_697_458_769_514e-16,
    1.186_692_254_751_600_332_58e-18,
    1.412_380_655_318_031_781_556e-18,
    -2.298_745_684_435_370_206_592e-19,
    1.714_406_321_927_337_433_384e-20,
];

/// `(gam1, gam2, 1/Gamma(1+mu), 1/Gamma(1-mu))` for `|mu| <= 1/2`, where
/// `gam1 = (1/Gamma(1-mu) - 1/Gamma(1+mu)) / (2 mu)` and
/// `gam2 = (1/Gamma(1-mu) + 1/Gamma(1+mu)) / 2`.
fn temme_gammas(mu: f64) -> (f64, f64, f64, f64) {
    let mu2 = mu * mu;
    let mut g1 = 0.0;
    let mut g2 = 0.0;
    let mut p_even = 1.0;
    let mut p_odd = 1.0;
    for (idx, &c) in RECIP_GAMMA.iter().enumerate() {
        let k = idx + 1;
        if k % 2 == 0 {
            g1 -= c * p_even;
            p_even *= mu2;
        } else {
            g2 += c * p_odd;
            p_odd *= mu2;
        }
    }
    let gampl = g2 - mu * g1;
    let gammi = g2 + mu * g1;
    (g1, g2, gampl, gammi)
}

/// `(K_mu(x), K_{mu+1}(x))` for `|mu| <= 1/2`, `0 < x < 2`.
fn temme_series(mu: f64, x: f64) -> (f64, f64) {
    let (gam1, gam2, gampl, gammi) = temme_gammas(mu);
    let x2 = 0.5 * x;
    let pimu = PI * mu;
    let fact = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
    let d = -x2.ln();
    let e = mu * d;
    let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
    let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
    let mut sum = ff;
    let ee = e.exp();
    let mut p = 0.5 * ee / gampl;
    let mut q = 0.5 / (ee * gammi);
    let mut c = 1.0;
    let dd = x2 * x2;
    let mut sum1 = p;
    for i in 1..MAX_ITER {
        let fi = i as f64;
        ff = (fi * ff + p + q) / (fi * fi - mu * mu);
        c *= dd / fi;
        p /= fi - mu;
        q /= fi + mu;
        let del = c * ff;
        sum += del;
        let del1 = c * (p - fi * ff);
        sum1 += del1;
        if del.abs() < sum.abs() * EPS {
            break;
        }
    }
    (sum, sum1 * 2.0 / x)
}

/// `(e^x K_mu(x), e^x K_{mu+1}(x))` for `|mu| <= 1/2`, `x >= 2`.
fn steed_cf2(mu: f64, x: f64) -> (f64, f64) {
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25 - mu * mu;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 1..MAX_ITER {
        let fi = i as f64;
        a -= 2.0 * fi;
        c = -a * c / (fi + 1.0);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < EPS {
            break;
        }
    }
    let kmu = (PI / (2.0 * x)).sqrt() / s;
    let k1 = kmu * (mu + x + 0.5 - a1 * h) / x;
    (kmu, k1)
}

/// Natural logarithm of `K_nu(x)`; finite for every `nu` and `x > 0`.
pub fn bessel_k_ln(nu: f64, x: f64) -> Result<f64, SpecialError> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(SpecialError::Domain { func: "bessel_k", arg: x });
    }
    if !nu.is_finite() {
        return Err(SpecialError::Domain { func: "bessel_k", arg: nu });
    }
    let nu = nu.abs();
    let nl = (nu + 0.5).floor();
    let mu = nu - nl;
    let (mut k_mu, mut k_mu1, mut log_offset) = if x < 2.0 {
        let (a, b) = temme_series(mu, x);
        (a, b, 0.0)
    } else {
        let (a, b) = steed_cf2(mu, x);
        (a, b, -x)
    };
    let xi2 = 2.0 / x;
    for i in 1..=(nl as usize) {
        // Renormalize before the step can leave the double range.
        if k_mu1 > 1e250 / ((mu + i as f64) * xi2).max(1.0) {
            log_offset += k_mu1.ln();
            k_mu /= k_mu1;
            k_mu1 = 1.0;
        }
        let next = (mu + i as f64) * xi2 * k_mu1 + k_mu;
        k_mu = k_mu1;
        k_mu1 = next;
    }
    Ok(k_mu.ln() + log_offset)
}

/// `K_nu(x)`, even in `nu`. Returns `0.0` when the value underflows and an
/// overflow error when it exceeds the double range.
pub fn bessel_k(nu: f64, x: f64) -> Result<f64, SpecialError> {
    let ln = bessel_k_ln(nu, x)?;
    if ln > f64::MAX.ln() {
        return Err(SpecialError::Overflow { func: "bessel_k", arg: x });
    }
    Ok(ln.exp())
}

/// Like [`bessel_k`] but reports whether the result underflowed to zero.
pub fn bessel_k_flagged(nu: f64, x: f64) -> Result<(f64, bool), SpecialError> {
    let ln = bessel_k_ln(nu, x)?;
    if ln > f64::MAX.ln() {
        return Err(SpecialError::Overflow { func: "bessel_k", arg: x });
    }
    let v = ln.exp();
    Ok((v, v == 0.0 || v < f64::MIN_POSITIVE))
}

/// `E_1(z)` for `z > 0`.
fn exp_integral_e1(z: f64) -> f64 {
    if z <= 1.0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..MAX_ITER {
            let fk = k as f64;
            term *= -z / fk;
            let add = -term / fk;
            sum += add;
            if add.abs() < EPS * sum.abs().max(1e-300) {
                break;
            }
        }
        -EULER_GAMMA - z.ln() + sum
    } else {
        // Modified Lentz evaluation of the continued fraction.
        let tiny = 1e-300;
        let mut b = z + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..MAX_ITER {
            let fi = i as f64;
            let an = -fi * fi;
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < EPS {
                break;
            }
        }
        h * (-z).exp()
    }
}

/// Principal-value exponential integral `Ei(x)`.
pub fn exp_integral_ei(x: f64) -> Result<f64, SpecialError> {
    if x == 0.0 || !x.is_finite() {
        return Err(SpecialError::Domain { func: "exp_integral_ei", arg: x });
    }
    if x < 0.0 {
        return Ok(-exp_integral_e1(-x));
    }
    if x > f64::MAX.ln() + 6.0 {
        return Err(SpecialError::Overflow { func: "exp_integral_ei", arg: x });
    }
    if x <= 40.0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..MAX_ITER {
            let fk = k as f64;
            term *= x / fk;
            let add = term / fk;
            sum += add;
            if add < EPS * sum {
                break;
            }
        }
        Ok(EULER_GAMMA + x.ln() + sum)
    } else {
        // Asymptotic series, truncated at its smallest term.
        let mut sum = 1.0;
        let mut term = 1.0;
        for k in 1..MAX_ITER {
            let prev = term;
            term *= k as f64 / x;
            if term >= prev || term < EPS * sum {
                break;
            }
            sum += term;
        }
        let v = (x - x.ln()).exp() * sum;
        if !v.is_finite() {
            return Err(SpecialError::Overflow { func: "exp_integral_ei", arg: x });
        }
        Ok(v)
    }
}

/// `ln Gamma(x)` for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64, SpecialError> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(SpecialError::Domain { func: "log_gamma", arg: x });
    }
    Ok(statrs::function::gamma::ln_gamma(x))
}

/// `Gamma(x)` for `x > 0`.
pub fn gamma(x: f64) -> Result<f64, SpecialError> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(SpecialError::Domain { func: "gamma", arg: x });
    }
    let v = statrs::function::gamma::gamma(x);
    if !v.is_finite() {
        return Err(SpecialError::Overflow { func: "gamma", arg: x });
    }
    Ok(v)
}

/// Beta function `B(a, b)` for `a, b > 0`.
pub fn beta(a: f64, b: f64) -> Result<f64, SpecialError> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(SpecialError::Domain { func: "beta", arg: a });
    }
    if !(b > 0.0) || !b.is_finite() {
        return Err(SpecialError::Domain { func: "beta", arg: b });
    }
    Ok((log_gamma(a)? + log_gamma(b)? - log_gamma(a + b)?).exp())
}

/// Normalized Whittle-Matérn profile `M_nu(r) = 2^{1-nu}/Gamma(nu) r^nu K_nu(r)`
/// with `M_nu(0) = 1`.
pub fn matern_profile(nu: f64, r: f64) -> Result<f64, SpecialError> {
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(SpecialError::Domain { func: "matern_profile", arg: nu });
    }
    if r < 0.0 || !r.is_finite() {
        return Err(SpecialError::Domain { func: "matern_profile", arg: r });
    }
    if r < 1e-12 {
        return Ok(1.0);
    }
    let ln = (1.0 - nu) * std::f64::consts::LN_2 - log_gamma(nu)? + nu * r.ln() + bessel_k_ln(nu, r)?;
    Ok(ln.exp())
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    fn k_half(x: f64) -> f64 {
        (PI / (2.0 * x)).sqrt() * (-x).exp()
    }

    #[test]
    fn k_half_closed_form() {
        for &x in &[1e-8, 1e-3, 0.1, 0.5, 1.0, 1.999, 2.0, 2.5, 10.0, 50.0, 300.0, 700.0] {
            assert!(rel(bessel_k(0.5, x).unwrap(), k_half(x)) < 1e-12, "x={x}");
        }
        assert!(rel(bessel_k(0.5, 1.0).unwrap(), 0.461_068_504_447_894_4) < 1e-12);
    }

    #[test]
    fn k_three_halves_closed_form() {
        for &x in &[0.01, 0.7, 2.0, 6.0, 40.0] {
            let exact = k_half(x) * (1.0 + 1.0 / x);
            assert!(rel(bessel_k(1.5, x).unwrap(), exact) < 1e-12, "x={x}");
        }
    }

    #[test]
    fn reference_values() {
        let cases = [
            (1.5, 2.0, 0.179_906_657_952_092_171_052),
            (0.0, 1e-8, 18.536_612_259_610_778_388_4),
            (50.0, 700.0, 2.779_335_877_012_058_502_45e-305),
            (0.3, 0.01, 6.890_102_638_292_769_543_17),
            (10.0, 5.0, 9.758_562_829_177_810_131_74),
        ];
        for (nu, x, want) in cases {
            let got = bessel_k(nu, x).unwrap();
            assert!(rel(got, want) < 1e-10, "K_{nu}({x}) = {got}, want {want}");
        }
    }

    #[test]
    fn even_in_order_and_domain() {
        assert_eq!(bessel_k(2.0, 3.0).unwrap(), bessel_k(-2.0, 3.0).unwrap());
        assert!(matches!(bessel_k(1.0, 0.0), Err(SpecialError::Domain { .. })));
        assert!(matches!(bessel_k(1.0, -1.0), Err(SpecialError::Domain { .. })));
        assert!(matches!(bessel_k(50.0, 1e-8), Err(SpecialError::Overflow { .. })));
        let (v, under) = bessel_k_flagged(0.0, 800.0).unwrap();
        assert_eq!(v, 0.0);
        assert!(under);
    }

    #[test]
    fn monotone_decreasing() {
        for &nu in &[0.0, 0.3, 2.5, 20.0] {
            let mut prev = f64::INFINITY;
            for i in 1..400 {
                let x = 0.05 * i as f64;
                let v = bessel_k(nu, x).unwrap();
                assert!(v < prev);
                prev = v;
            }
        }
    }

    #[test]
    fn ei_reference_values() {
        let cases = [
            (-1.0, -0.219_383_934_395_520_273_68),
            (-2.0, -0.048_900_510_708_061_119_57),
            (1.0, 1.895_117_816_355_936_755_47),
            (10.0, 2_492.228_976_241_877_759),
            (50.0, 1.058_563_689_713_169_096_31e20),
            (-1e-6, -13.238_295_893_062_491_288_8),
            (700.0, 1.450_978_736_052_560_852_62e301),
            (-700.0, -1.406_518_766_234_032_922_77e-307),
        ];
        for (x, want) in cases {
            let got = exp_integral_ei(x).unwrap();
            assert!(rel(got, want) < 1e-10, "Ei({x}) = {got}, want {want}");
        }
        assert!(exp_integral_ei(0.0).is_err());
        assert!(exp_integral_ei(-50.0).unwrap().abs() < 1e-20);
        // Ei is decreasing on (-inf, 0) since Ei'(x) = e^x / x < 0.
        assert!(exp_integral_ei(-2.0).unwrap() - exp_integral_ei(-1.0).unwrap() > 0.0);
    }

    #[test]
    fn beta_identities() {
        assert!((beta(1.0, 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((beta(1.0, 3.0).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(beta(2.5, 3.5).unwrap(), beta(3.5, 2.5).unwrap());
        assert!(beta(0.0, 1.0).is_err());
        assert!(log_gamma(-1.0).is_err());
    }

    #[test]
    fn matern_profile_half() {
        for &r in &[0.0, 1e-13, 0.3, 1.0, 4.0] {
            let got = matern_profile(0.5, r).unwrap();
            assert!((got - (-r).exp()).abs() < 1e-12, "r={r}");
        }
    }
}
