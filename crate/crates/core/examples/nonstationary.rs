//! Non-stationary kernels: compact support, locally varying anisotropy, and
//! a smoothness-varying Matern whose definiteness is not claimed.

use covkit::kernel::{constant, ScalarField};
use covkit::nonstationary::{askey_beta, nonstationary_matern, paciorek_mixture, AnisotropyField, LocalAnisotropyField, QuadNode};
use covkit::pcv::pcv_power;
use covkit::validation::{check_pd, ValidationConfig};
use covkit::SymMatrix;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = pcv_power(2, 2, 1.0, 1.0, None)?;
    let askey = askey_beta(&g, 1.5, 2.5)?;
    for r in [0.0, 1.0, 1.5] {
        println!("askey C_11 at distance {r}: {:.6}", askey.evaluate(&[0.0, 0.0], &[r, 0.0])?[(0, 0)]);
    }

    let field = LocalAnisotropyField {
        dim: 2,
        sigmas: vec![
            AnisotropyField::RotatingEllipse { angle: 0.0, angle_slope: vec![0.8, 0.0], log_major: 0.5, log_minor: -0.5, log_slope: vec![0.0, 0.2] },
            AnisotropyField::Scaled { base: SymMatrix::identity(2)?, intercept: 0.0, slope: vec![0.3, 0.0] },
        ],
    };
    let nodes = vec![QuadNode { t: 0.5, w: 0.5 }, QuadNode { t: 2.0, w: 0.5 }];
    let paciorek = paciorek_mixture(field.clone(), &g, nodes)?;
    let cfg = ValidationConfig::new(2);
    println!("paciorek mixture: {:?}", check_pd(&paciorek, &cfg).verdict);

    let matern = nonstationary_matern(field.clone(), vec![ScalarField::constant(1.5); 2], &constant(2, 2, 0.2)?)?;
    println!("matern, common nu: claim {:?}, check {:?}", matern.kind().label(), check_pd(&matern, &cfg).verdict);

    let varying = vec![ScalarField::Affine { intercept: 1.0, slope: vec![0.3, 0.0] }, ScalarField::constant(2.0)];
    let loose = nonstationary_matern(field, varying, &constant(2, 2, 0.0)?)?;
    let r = check_pd(&loose, &cfg.configs(50, 12));
    println!("matern, varying nu: claim {:?}, check {:?}", loose.kind().label(), r.verdict);
    for c in loose.caveats() {
        println!("  caveat: {c}");
    }
    Ok(())
}
