//! Normalization, composition, powers and stabilization of candidates, and
//! the origin orbit of a normalized Möbius map.
//!
//!     cargo run --example compose_and_stabilize

use freespec::freemap::{
    compose, normalize, orbit_crossing, mobius_origin_orbit, power, power_stabilize, CandidateAutomorphism,
};
use freespec::linalg::c64;

fn main() -> freespec::Result<()> {
    let phi = CandidateAutomorphism::new(
        vec![2, 3, 1],
        vec![0.3, -0.2, 1.1],
        vec![c64(0.0, 0.4), c64(0.0, 0.0), c64(0.0, 0.0)],
    )?;
    let n = normalize(&phi);
    println!("normalized: perm {:?} theta {:?} b {:?}", n.perm(), n.theta(), n.b());

    let sq = compose(&phi, &phi)?;
    println!("φ∘φ: perm {:?} |b| {:?}", sq.perm(), sq.b().iter().map(|z| z.norm()).collect::<Vec<_>>());
    let cube = power(&phi, 3)?;
    println!("φ³ perm {:?}", cube.perm());

    let s = power_stabilize(&phi, &[1, 2, 3])?;
    println!(
        "stabilization: N = {}, ℓ = {}, n = {}, support {:?}",
        s.support_index, s.cycle_order, s.n, s.support
    );

    for m in [1, 2, 5, 10, 50] {
        println!("𝔪̂_0.5^({m})(0) = {:.6}", mobius_origin_orbit(0.5, m));
    }
    println!("first crossing of 0.99: m = {:?}", orbit_crossing(0.5, 0.99, 1000));
    Ok(())
}
