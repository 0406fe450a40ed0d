//! The polydisc-summand and direct-sum detectors on pencils that have and
//! lack each structure.
//!
//!     cargo run --example detect_structure

use freespec::classify::{aux_pencil, build_nopi_tuple, detect_direct_sum, detect_polydisc_summand, DetectConfig};
use freespec::linalg::DEFAULT_TOL;
use freespec::pencil::{MatrixTuple, Pencil};

fn main() -> freespec::Result<()> {
    let cfg = DetectConfig {
        budget: 200,
        ..DetectConfig::default()
    };
    for (name, p) in [("split", Pencil::split()), ("chain", Pencil::chain(2))] {
        let poly = detect_polydisc_summand(&p, &[1], &cfg)?;
        let sum = detect_direct_sum(&p, 1, &cfg)?;
        println!("{name}: polydisc summand {{1}} {:?}, direct sum at 1 {:?}", poly.verdict, sum.verdict);
        if let (Some(w), Some(m)) = (&sum.witness, sum.witness_margin) {
            println!(
                "  witness ({:.4}, {:.4}) margin {m:.4}, rechecks: {}",
                w.coord(1)[(0, 0)].re,
                w.coord(2)[(0, 0)].re,
                sum.recheck_witness(&p, DEFAULT_TOL)?
            );
        }
    }

    let poly = detect_polydisc_summand(&Pencil::polydisc(3), &[1, 2, 3], &cfg)?;
    println!("polydisc(3), all coordinates: {:?}", poly.verdict);

    // Each half of (0.9, 0.9) is fine on the chain, the pair is not, and the
    // doubled-level tuple built from it is fine again.
    let chain = Pencil::chain(2);
    let x = MatrixTuple::real_scalars(&[0.9, 0.9]);
    let z = build_nopi_tuple(&chain, &x, 1, &[])?;
    println!(
        "chain: X {:?}, Z {:?}",
        chain.membership(&x, DEFAULT_TOL)?.kind,
        chain.membership(&z, DEFAULT_TOL)?.kind
    );

    for (name, p) in [("split", Pencil::split()), ("chain", Pencil::chain(2))] {
        let aux = aux_pencil(&p, &[1], &[0.5])?;
        println!("{name}: x₁ frozen at 0.5 leaves x₂ radius {:.6}", aux.pencil.scalar_radius(2.0));
    }
    Ok(())
}
