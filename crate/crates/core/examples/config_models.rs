//! Declarative model configs: parse, inspect the claim, evaluate, and write
//! the canonical form back out.

use covkit::cli::parse_config;

const CONFIG: &str = r#"{
  "m": 2, "dim_space": 2, "dim_time": 1,
  "model": {"op": "lagrangian_mixture",
    "params": {"sigma": [[1.0, 0.0], [0.0, 1.0]], "sigmas": [[[0.5, 0.1], [0.1, 0.3]]], "theta": [0.5, 0.0],
               "mixture": {"type": "transform", "transform": {"family": "gamma", "shape": 2.0, "rate": 1.0}}},
    "children": [{"op": "pcv_power", "params": {"alpha": 1.0}}]}
}"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = parse_config(CONFIG)?;
    println!("op {}, m = {}, dim = {}, claim {:?}", model.spec.op(), model.spec.m(), model.spec.dim(), model.spec.kind().label());
    let c = model.spec.evaluate(&[0.5, 0.0, 1.0], &[0.0, 0.0, 0.0])?;
    println!("C(x, y) = [[{:.5}, {:.5}], [{:.5}, {:.5}]]", c[(0, 0)], c[(0, 1)], c[(1, 0)], c[(1, 1)]);
    println!("{}", model.to_json());
    Ok(())
}
