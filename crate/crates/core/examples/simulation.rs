//! Gaussian realizations of a delayed bivariate field and the empirical pseudo
//! cross-variogram compared with theory.

use covkit::pcv::{pcv_delay, pcv_power};
use covkit::simulation::{empirical_pcv, sample_gaussian, theoretical_pcv};
use covkit::stationary::schoenberg_exp;
use covkit::PointSet;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = pcv_delay(&pcv_power(1, 1, 1.0, 1.0, None)?, vec![vec![0.0], vec![0.35]])?;
    let model = schoenberg_exp(&g, 1.0)?;
    let spacing = 0.1;
    let pts = PointSet::new(1, 0, (0..64).map(|k| k as f64 * spacing).collect())?;
    let reals = sample_gaussian(&model, &pts, 500, 7, false)?;
    let lags: Vec<Vec<f64>> = (-4..=4).map(|k| vec![k as f64 * spacing]).collect();
    let est = empirical_pcv(&reals, &lags, 1e-9, 20)?;

    println!("{:>6} {:>10} {:>10} {:>8}", "h", "gamma_12", "theory", "se");
    for b in &est.bins {
        let (Some(e), Some(se)) = (&b.estimate, &b.std_error) else { continue };
        let t = theoretical_pcv(&model, &b.lag)?;
        println!("{:>6.2} {:>10.4} {:>10.4} {:>8.4}", b.lag[0], e[(0, 1)], t[(0, 1)], se[(0, 1)]);
    }
    Ok(())
}
