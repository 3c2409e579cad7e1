//! Spectral abscissa of both variants across the corners of the damping
//! exponent cube [0,1]^3: every corner is strictly stable.
//!
//! Run with: cargo run --release --example spectrum_map

use semibeam::{assemble_generator, spectral_abscissa, ModelParameters, SystemVariant};

fn main() {
    let n = 24;
    println!("exponents        System01 abscissa   System02 abscissa");
    for a in [0.0, 1.0] {
        for b in [0.0, 1.0] {
            for c in [0.0, 1.0] {
                let mut row = format!("({a:>3}, {b:>3}, {c:>3})");
                for variant in [SystemVariant::System01, SystemVariant::System02] {
                    let p = ModelParameters::defaults(variant).with_exponents([a, b, c]);
                    let gen = assemble_generator(&p, n).unwrap();
                    row.push_str(&format!("   {:>17.10}", spectral_abscissa(&gen).unwrap()));
                }
                println!("{row}");
            }
        }
    }
}
