//! Builds several pseudo cross-variogram families, certifies them, and shows
//! that a delay model is not symmetric in its cross entries.

use covkit::kernel::{covariance, CovShape};
use covkit::pcv::{pcv_bernstein, pcv_delay, pcv_oesting, pcv_power, power_law, BernsteinTransform};
use covkit::validation::{check_cnd, check_pseudo_variogram, ValidationConfig};
use covkit::{KernelSpec, SymMatrix};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let linear = pcv_power(1, 1, 1.0, 1.0, None)?;
    let sill = SymMatrix::from_rows(&[vec![1.0, 0.6], vec![0.6, 1.0]])?;
    let families: Vec<(&str, KernelSpec)> = vec![
        ("power 1.5, m=2", pcv_power(2, 1, 1.5, 1.0, None)?),
        ("delay 0 / 0.5", pcv_delay(&linear, vec![vec![0.0], vec![0.5]])?),
        ("oesting", pcv_oesting(&linear, &covariance(2, 1, CovShape::Exponential, 1.0, Some(sill))?)?),
        ("log(1 + delay)", pcv_bernstein(&pcv_delay(&linear, vec![vec![0.0], vec![0.5]])?, BernsteinTransform::Log1p)?),
    ];
    let cfg = ValidationConfig::new(1);
    for (name, g) in &families {
        let r = check_pseudo_variogram(g, &cfg);
        println!("{name:>16}: {:?} ({:?})", r.verdict, g.kind().label());
    }

    let delay = &families[1].1;
    for h in [0.25, 0.5, 1.0] {
        let ahead = delay.evaluate(&[h], &[0.0])?;
        let behind = delay.evaluate(&[-h], &[0.0])?;
        println!("h = {h:4}: gamma_12(h) = {:.4}, gamma_12(-h) = {:.4}", ahead[(0, 1)], behind[(0, 1)]);
    }

    // Exponents above two are not variograms; the checker finds a witness.
    let bad = power_law(1, 1, 2.5, 1.0, None)?;
    let r = check_cnd(&bad, &ValidationConfig::new(1).configs(200, 12));
    if let Some(w) = &r.witness {
        println!("|h|^2.5: {:?}, a^T G a = {:.3e} on {} points (config {})", r.verdict, w.quadratic_form, w.points.len(), w.config);
    }
    Ok(())
}
