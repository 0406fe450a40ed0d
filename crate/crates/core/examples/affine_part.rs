//! Recover the center b and the linear part ℒ of a free map from level-2
//! probes at 0 and at δ_k S.
//!
//!     cargo run --example affine_part

use freespec::freemap::{eval, extract_affine_linear, CandidateAutomorphism, EvalMode};
use freespec::linalg::c64;

fn main() -> freespec::Result<()> {
    let c = CandidateAutomorphism::new(
        vec![3, 1, 2],
        vec![0.5, 1.0, -0.7],
        vec![c64(0.2, 0.1), c64(0.0, 0.0), c64(-0.4, 0.3)],
    )?;
    let part = extract_affine_linear(|x| eval(&c, x, EvalMode::Strict), c.g())?;
    println!("b = {:?}", part.b);
    println!("one nonzero per row and column: {}", part.is_scaled_permutation);
    for j in 0..c.g() {
        let row: Vec<String> = (0..c.g())
            .map(|k| {
                let z = part.l[(j, k)];
                format!("{:+.4}{:+.4}i", z.re, z.im)
            })
            .collect();
        println!("ℒ[{}] = [{}]", j + 1, row.join(", "));
    }
    Ok(())
}
