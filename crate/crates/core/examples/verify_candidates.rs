//! Push Möbius-permutation candidates through the sample plan and watch
//! the ones with nonzero centers fail on a pencil that is neither a
//! polydisc nor a direct sum.
//!
//!     cargo run --example verify_candidates

use freespec::freemap::{verify_automorphism, CandidateAutomorphism, SamplePlan};
use freespec::linalg::c64;
use freespec::pencil::Pencil;

fn report(p: &Pencil, label: &str, c: &CandidateAutomorphism, plan: &SamplePlan) {
    let r = verify_automorphism(p, c, plan);
    let witness = r
        .witness()
        .map(|w| format!("{:?} at level {}, image margin {:.3e}", w.family, w.input.level(), w.image_margin))
        .unwrap_or_else(|| "-".into());
    println!("{label:<24} {:?}  samples {:>3}  witness {witness}", r.verdict(), r.samples);
}

fn main() -> freespec::Result<()> {
    let plan = SamplePlan {
        interior_samples: 60,
        ..SamplePlan::default()
    };
    let chain = Pencil::chain(2);
    let rot = CandidateAutomorphism::trivial(vec![0.4, -2.0])?;
    report(&chain, "chain, rotation", &rot, &plan);
    for b in [0.1, 0.5] {
        let c = CandidateAutomorphism::new(vec![1, 2], vec![0.0, 0.0], vec![c64(b, 0.0), c64(0.0, 0.0)])?;
        report(&chain, &format!("chain, b1 = {b}"), &c, &plan);
    }
    let swap = CandidateAutomorphism::new(vec![2, 1], vec![0.0, 0.0], vec![c64(0.0, 0.0); 2])?;
    report(&chain, "chain, swap", &swap, &plan);

    // On two decoupled discs, centers and the swap are both fine.
    let split = Pencil::split();
    let c = CandidateAutomorphism::new(vec![2, 1], vec![0.3, 0.0], vec![c64(0.5, 0.0), c64(0.0, 0.2)])?;
    report(&split, "split, swap + centers", &c, &plan);

    let disc = Pencil::disc();
    let c = CandidateAutomorphism::new(vec![1], vec![1.0], vec![c64(0.5, 0.0)])?;
    report(&disc, "disc, b = 0.5", &c, &plan);
    Ok(())
}
