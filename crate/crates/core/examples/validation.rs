//! Definiteness checks on ad-hoc kernels: a passing one, a failing one with its
//! witness, and an adversarial point search.

use covkit::kernel::FnKernel;
use covkit::pcv::pcv_shape;
use covkit::pcv::VariogramShape;
use covkit::validation::{adversarial_search, check_pd, schoenberg_equivalence, CheckMode, ValidationConfig};
use covkit::Mat;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Linear model of coregionalization: B * exp(-|h|) with B PSD.
    let lmc = FnKernel::new(2, 1, |x: &[f64], y: &[f64]| {
        let r = (-(x[0] - y[0]).abs()).exp();
        Mat::from_row_slice(2, 2, &[1.0, 0.9, 0.9, 1.0]) * r
    });
    let cfg = ValidationConfig::new(1).seed(3);
    println!("LMC: {:?}", check_pd(&lmc, &cfg).verdict);

    // A cross-correlation above one is not a covariance.
    let too_strong = FnKernel::new(2, 1, |x: &[f64], y: &[f64]| {
        let r = (-(x[0] - y[0]).abs()).exp();
        Mat::from_row_slice(2, 2, &[1.0, 1.2, 1.2, 1.0]) * r
    });
    let r = check_pd(&too_strong, &cfg);
    println!("cross-correlation 1.2: {:?}, worst eigenvalue {:?}", r.verdict, r.worst_value);
    if let Some(w) = r.witness {
        println!("  witness: config {}, a^T G a = {:.3e}, {} points", w.config, w.quadratic_form, w.points.len());
    }

    // Sharp but valid: the search does not manufacture a violation.
    let narrow = FnKernel::new(1, 2, |x: &[f64], y: &[f64]| {
        let d2 = (x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2);
        Mat::from_element(1, 1, (-25.0 * d2).exp())
    });
    let r = adversarial_search(&narrow, &ValidationConfig::new(2).configs(5, 8), CheckMode::Pd, 2);
    println!("narrow Gaussian after search: {:?}", r.verdict);

    let g = pcv_shape(2, 2, VariogramShape::Cauchy { beta: 0.5 }, 1.0, None)?;
    let eq = schoenberg_equivalence(&g, &[0.1, 1.0, 10.0], &ValidationConfig::new(2));
    println!("Cauchy variogram: CND {:?}, Schoenberg round trip {:?}", eq.cnd.verdict, eq.roundtrip.verdict);
    Ok(())
}
