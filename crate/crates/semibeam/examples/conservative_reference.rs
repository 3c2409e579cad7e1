//! Energy conservation of the undamped, uncoupled beam block: the implicit
//! midpoint step is an exact energy isometry and the eigendecomposition
//! propagator holds the energy constant.
//!
//! Run with: cargo run --release --example conservative_reference

use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use semibeam::{
    assemble_generator, assemble_gram, step_implicit_midpoint, Block, ModelParameters, Propagator,
    StateVector, SystemVariant,
};

fn main() {
    let mut params = ModelParameters::defaults(SystemVariant::System02);
    params.gamma1 = 0.0;
    params.gamma2 = 0.0;
    params.gamma3 = 0.0;
    params.delta = 1e-30;
    let n = 24;
    let gen = assemble_generator(&params, n).unwrap();
    let gram = assemble_gram(&params, n).unwrap();

    let mut rng = ChaCha12Rng::seed_from_u64(4);
    let mut u0 = StateVector::zero(n, params.length).unwrap();
    for b in semibeam::state::BLOCKS {
        if b != Block::Temperature {
            for v in u0.block_mut(b).iter_mut() {
                *v = rng.random_range(-1.0..1.0);
            }
        }
    }
    let e0 = gram.norm_sq(&u0).unwrap();

    let mut cur = u0.clone();
    let mut worst = 0.0f64;
    for _ in 0..200 {
        cur = step_implicit_midpoint(&gen, &cur, 0.05).unwrap();
        worst = worst.max((gram.norm_sq(&cur).unwrap() - e0).abs() / e0);
    }
    println!("implicit midpoint, 200 steps of dt = 0.05: max energy drift {worst:.3e}");

    let times: Vec<f64> = (0..=40).map(|k| k as f64 * 0.25).collect();
    let prop = Propagator::new(&gen, &gram).unwrap();
    let traj = prop.propagate(&u0, &times, 0).unwrap();
    let drift = traj
        .energies
        .iter()
        .map(|e| (e - traj.energies[0]).abs() / traj.energies[0])
        .fold(0.0f64, f64::max);
    println!("exact propagator over t in [0, 10]:        max energy drift {drift:.3e}");
}
