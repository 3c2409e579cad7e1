//! Propagate the smooth reference datum for the frictional corner
//! (zero damping exponents, System01) and compare the fitted energy decay
//! rate with the spectral abscissa.
//!
//! Run with: cargo run --release --example simulate_decay

use semibeam::{assemble_generator, assemble_gram, fit_decay_rate, Propagator, StateVector};
use semibeam::{ModelParameters, SystemVariant};

fn main() {
    let params = ModelParameters::defaults(SystemVariant::System01).with_exponents([0.0, 0.0, 0.0]);
    let n = 24;
    let gen = assemble_generator(&params, n).unwrap();
    let gram = assemble_gram(&params, n).unwrap();
    let u0 = StateVector::smooth_datum(n, params.length).unwrap();

    let t_end = 200.0;
    let times: Vec<f64> = (0..=800).map(|k| t_end * k as f64 / 800.0).collect();
    let prop = Propagator::new(&gen, &gram).unwrap();
    let traj = prop.propagate(&u0, &times, 0).unwrap();

    println!("t         energy         dissipation");
    for k in (0..traj.times.len()).step_by(100) {
        println!(
            "{:8.2}  {:13.6e}  {:13.6e}",
            traj.times[k], traj.energies[k], traj.dissipations[k]
        );
    }
    let fit = fit_decay_rate(&traj, (t_end / 4.0, t_end)).unwrap();
    println!();
    println!("fitted decay rate omega   = {:.8} (energy ~ exp(-2 omega t))", fit.omega);
    println!("spectral abscissa         = {:.8}", fit.spectral_abscissa);
    println!("ratio omega / (-abscissa) = {:.6}", fit.omega / -fit.spectral_abscissa);
    println!("fit r^2                   = {:.8}", fit.r_squared);
}
