//! Verify the energy dissipation identity Re<BU,U>_G = dissipation_rate(U)
//! on random complex states of both system variants.
//!
//! Run with: cargo run --release --example dissipativity_check

use ndarray::Array1;
use ndarray_linalg::c64;
use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use semibeam::{
    assemble_generator, assemble_gram, dissipation_rate, ModelParameters, StateVector,
    SystemVariant,
};

fn main() {
    let n = 16;
    let mut rng = ChaCha12Rng::seed_from_u64(7);
    for variant in [SystemVariant::System01, SystemVariant::System02] {
        let params = ModelParameters::defaults(variant).with_exponents([0.3, 0.6, 0.9]);
        let gen = assemble_generator(&params, n).unwrap();
        let gram = assemble_gram(&params, n).unwrap();
        let mut worst = 0.0f64;
        for _ in 0..200 {
            let data = Array1::from_iter((0..9 * n).map(|_| {
                c64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            }));
            let u = StateVector::from_flat(data, params.length).unwrap();
            let bu = gen.apply_complex(&u).unwrap();
            let quadratic = gram.inner_re(&bu, &u).unwrap();
            let rate = dissipation_rate(&params, &u).unwrap();
            worst = worst.max((quadratic - rate).abs() / (1.0 + gram.norm_sq(&u).unwrap()));
        }
        println!("{variant}: worst |Re<BU,U>_G - rate| / (1 + ||U||^2) = {worst:.3e} over 200 states");
    }
}
