//! Extreme Carathéodory extension along a weighted shift: the Toeplitz
//! matrix has norm one, and perturbing its corner or any higher coefficient
//! pushes it above one.
//!
//!     cargo run --example caratheodory

use freespec::caratheodory::{
    extreme_toeplitz, mobius_coeffs, rigidity_check, toeplitz_from_coeffs, two_by_two_classify, MobiusSeed,
    WeightedShift,
};
use freespec::linalg::{c64, op_norm};

fn main() -> freespec::Result<()> {
    println!("(0.5, -0.75): {:?}", two_by_two_classify(c64(0.5, 0.0), c64(-0.75, 0.0)));
    println!("(0.5,  0.5 ): {:?}", two_by_two_classify(c64(0.5, 0.0), c64(0.5, 0.0)));

    let seed = MobiusSeed::new(c64(0.5, 0.2), 0.9)?;
    let shift = WeightedShift::new(vec![c64(1.0, 0.0), c64(0.0, 1.0), c64(0.8, 0.0), c64(0.6, -0.6)])?;
    let t = extreme_toeplitz(&seed, &shift)?;
    println!("‖T‖ = {:.12}", op_norm(&t));

    for r in [1e-3, 1e-2, 1e-1] {
        println!("‖T + μP‖ − 1 at μ = {r}: {:.3e}", rigidity_check(&t, c64(r, 0.0)));
    }

    let coeffs = mobius_coeffs(&seed, shift.order());
    for j in 2..coeffs.len() {
        let mut c = coeffs.clone();
        c[j] += 1e-2;
        println!("c_{j} + 0.01: ‖T‖ = {:.9}", op_norm(&toeplitz_from_coeffs(&c, &shift)?));
    }
    Ok(())
}
