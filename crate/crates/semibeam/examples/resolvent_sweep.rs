//! Resolvent norm along the imaginary axis for System02 within the
//! truncation's resolved band.
//!
//! Run with: cargo run --release --example resolvent_sweep

use semibeam::{
    assemble_generator, assemble_gram, validity_limit, ModelParameters, SweepOptions,
    SystemVariant,
};

fn main() {
    let params = ModelParameters::defaults(SystemVariant::System02).with_exponents([0.5, 0.5, 0.5]);
    let n = 32;
    let gen = assemble_generator(&params, n).unwrap();
    let gram = assemble_gram(&params, n).unwrap();
    let hi = validity_limit(params.length, n).unwrap();
    let grid: Vec<f64> = (0..40).map(|k| 0.1 * (hi / 0.1).powf(k as f64 / 39.0)).collect();
    let opts = SweepOptions { residual_probes: 2, seed: 1, workers: 0 };
    let points = semibeam::sweep(&gen, &gram, &grid, &opts).unwrap();
    println!("lambda        ||R(i lambda)||   residual");
    for pt in &points {
        match &pt.outcome {
            Ok(s) => println!("{:>10.4}  {:>15.8e}  {:>9.2e}", s.lambda, s.norm_energy, s.residual),
            Err(e) => println!("{:>10.4}  failed: {e}", pt.lambda),
        }
    }
    let sup = points
        .iter()
        .filter_map(|p| p.outcome.as_ref().ok().map(|s| s.norm_energy))
        .fold(0.0f64, f64::max);
    println!("\nsup over the grid: {sup:.8e} (bounded: the truncated semigroup is exponentially stable)");
}
