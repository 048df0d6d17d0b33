//! Stationary constructions from pseudo cross-variograms, each checked on
//! random point sets.

use covkit::pcv::{pcv_delay, pcv_power};
use covkit::stationary::{cosh_ratio, fonseca_steel, matern_mixture, schoenberg_exp, toy_ei_model, triple_laplace, FonsecaParams};
use covkit::validation::{check_pd, DomainBox, ValidationConfig};
use covkit::KernelSpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let linear = pcv_power(1, 1, 1.0, 1.0, None)?;
    let delay = pcv_delay(&linear, vec![vec![0.0], vec![0.4]])?;
    let gs = pcv_power(2, 2, 1.0, 1.0, None)?;
    let gt = pcv_power(2, 1, 1.5, 1.0, None)?;
    let p = FonsecaParams { a0: 1.5, a1: 0.7, a2: 2.0, lambda0: 0.8, lambda1: 1.3, lambda2: 0.5, delta: 0.9 };
    let [l0, l1, l2] = p.as_transforms();

    let spatial: Vec<(&str, KernelSpec)> =
        vec![("exp(-gamma), delay", schoenberg_exp(&delay, 1.0)?), ("cosh ratio, nu = 0.5", cosh_ratio(&delay, 0.5)?)];
    let space_time: Vec<(&str, KernelSpec)> = vec![
        ("Fonseca-Steel", fonseca_steel(&gs, &gt, p)?),
        ("triple Laplace", triple_laplace(&gs, &gt, l0, l1, l2)?),
        ("Matern mixture", matern_mixture(&gs, &gt, vec![1.0, 2.5])?),
        ("Ei toy model", toy_ei_model(&pcv_power(2, 2, 1.0, 1.0, None)?, &gt)?),
    ];

    for (name, c) in &spatial {
        let r = check_pd(c, &ValidationConfig::new(1));
        let (ahead, behind) = (c.evaluate(&[0.3], &[0.0])?, c.evaluate(&[-0.3], &[0.0])?);
        println!("{name:>22}: {:?}, C_12(0.3) = {:.5}, C_12(-0.3) = {:.5}", r.verdict, ahead[(0, 1)], behind[(0, 1)]);
    }
    let cfg = ValidationConfig::new(3).domain(DomainBox::cube(3, -2.0, 2.0).with_time(1));
    for (name, c) in &space_time {
        let r = check_pd(c, &cfg);
        let v = c.evaluate(&[0.0, 0.0, 0.0], &[0.5, -0.2, 1.0])?;
        println!("{name:>22}: {:?}, C_12 = {:.6}", r.verdict, v[(0, 1)]);
    }
    Ok(())
}
