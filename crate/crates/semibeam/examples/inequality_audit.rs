//! Audit the resolvent inequalities behind the stability and regularity
//! estimates: maximum observed ratios LHS / (||F|| ||U||) over a frequency
//! grid with random forcing probes.
//!
//! Run with: cargo run --release --example inequality_audit

use semibeam::{eigenvalue, lemma_audit, AuditOptions, ModelParameters, SystemVariant};

fn main() {
    let n = 32;
    let mu16 = eigenvalue(16, std::f64::consts::PI).unwrap();
    let grid: Vec<f64> = (0..16).map(|k| mu16.powf(k as f64 / 15.0)).collect();
    let opts = AuditOptions { trials: 10, seed: 3, probe_modes: 16, ceiling: 1e4 };
    for (variant, exps) in [
        (SystemVariant::System01, [0.5, 0.5, 0.5]),
        (SystemVariant::System02, [1.0, 1.0, 1.0]),
        (SystemVariant::System02, [0.25, 0.25, 0.25]),
    ] {
        let params = ModelParameters::defaults(variant).with_exponents(exps);
        let report = lemma_audit(&params, n, &grid, &opts).unwrap();
        println!("== {variant}, exponents {exps:?}");
        for e in &report.entries {
            if e.active {
                println!(
                    "  {:<16} max {:<12.4e} at lambda {:<8.3} {}",
                    e.name,
                    e.max_ratio,
                    e.lambda_at_max,
                    if e.flagged { "FLAGGED" } else { "" }
                );
            } else {
                println!("  {:<16} inactive (requires {})", e.name, e.hypothesis);
            }
        }
        println!();
    }
}
