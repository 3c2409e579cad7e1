//! Resolvent scaling exponents of System02 across fractional damping
//! strengths: fitted slope of ||R(i lambda)|| ~ lambda^{-p} against the
//! predicted 2 phi / (1 + phi) (slope 1 on the analytic region).
//!
//! Run with: cargo run --release --example gevrey_exponents

use semibeam::{
    assemble_generator, assemble_gram, eigenvalue, fit_exponent, gevrey_target, sweep,
    ModelParameters, ResolventSample, SweepOptions, SystemVariant,
};

fn main() {
    let n = 48;
    let mu12 = eigenvalue(12, std::f64::consts::PI).unwrap();
    let grid: Vec<f64> = (0..25).map(|k| 10.0 * (mu12 / 10.0).powf(k as f64 / 24.0)).collect();
    println!("beta    target 2b/(1+b)   fitted slope   pass (tol 0.15)");
    for beta in [0.25, 0.5, 0.75, 1.0] {
        let params =
            ModelParameters::defaults(SystemVariant::System02).with_exponents([beta, beta, beta]);
        let gen = assemble_generator(&params, n).unwrap();
        let gram = assemble_gram(&params, n).unwrap();
        let opts = SweepOptions { residual_probes: 0, seed: 1, workers: 0 };
        let samples: Vec<ResolventSample> = sweep(&gen, &gram, &grid, &opts)
            .unwrap()
            .into_iter()
            .map(|pt| pt.outcome.unwrap())
            .collect();
        let target = gevrey_target(params.exponents).unwrap();
        let fit = fit_exponent(&samples, (10.0, mu12), target, 0.15).unwrap();
        println!(
            "{beta:<7} {target:<17.6} {:<14.6} {}",
            fit.slope,
            if fit.pass { "yes" } else { "NO" }
        );
    }
}
