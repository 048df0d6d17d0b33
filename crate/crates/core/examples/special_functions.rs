//! Bessel K across orders and arguments, the exponential integral, and the
//! normalized Matern profile.

use covkit::special::{bessel_k, bessel_k_ln, exp_integral_ei, matern_profile};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for nu in [0.0, 0.5, 2.5, 40.0] {
        let row: Vec<String> = [1e-3, 1.0, 50.0].iter().map(|&x| format!("{:>12.5e}", bessel_k(nu, x).unwrap_or(f64::INFINITY))).collect();
        println!("K_{nu:<4} {}", row.join(" "));
    }
    // Past the double range the log form still works.
    println!("ln K_200(1e-3) = {:.3}", bessel_k_ln(200.0, 1e-3)?);
    for x in [-2.0, -1.0, 0.5, 5.0] {
        println!("Ei({x}) = {:.10}", exp_integral_ei(x)?);
    }
    for r in [0.0, 0.5, 2.0] {
        println!("M_1.5({r}) = {:.8}", matern_profile(1.5, r)?);
    }
    Ok(())
}
