//! Membership verdicts at several matrix levels, and the invariance of the
//! margin under the symmetries every hyper-Reinhardt pencil carries.
//!
//!     cargo run --example membership

use freespec::linalg::{c64, jordan_shift, real_diag, DEFAULT_TOL};
use freespec::pencil::{trivial_scale, unitary_conj, MatrixTuple, Pencil};
use freespec::sampling::{random_interior, random_phase, random_unitary};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> freespec::Result<()> {
    let chain = Pencil::chain(2);

    for (x, y) in [(0.5, 0.5), (0.7, 0.7), (0.99, 0.0), (0.99, 0.99)] {
        let v = chain.membership(&MatrixTuple::real_scalars(&[x, y]), DEFAULT_TOL)?;
        println!("chain at ({x}, {y}): {:?}, margin {:+.4}", v.kind, v.margin);
    }

    // The 2×2 shift on both coordinates sits exactly on the boundary.
    let s = jordan_shift(2);
    let pair = MatrixTuple::from_vec(vec![s.clone(), s])?;
    let v = chain.membership(&pair, DEFAULT_TOL)?;
    println!("shift pair: {:?}, kernel dim {}", v.kind, v.kernel.map(|k| k.ncols()).unwrap_or(0));

    // Blocks need not be scalars; this one has C_1 = diag(1, 0.4) and
    // C_2 a 2×1 column.
    let mixed = Pencil::build(
        vec![2, 2, 1],
        vec![
            real_diag(&[1.0, 0.4]),
            freespec::linalg::CMatrix::from_column_slice(2, 1, &[c64(0.6, 0.0), c64(0.0, 0.8)]),
        ],
        false,
    )?;

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in 1..=3 {
        let x = random_interior(&mut rng, &mixed, n);
        let m = mixed.margin(&x)?;
        let u = random_unitary(&mut rng, n);
        let gamma = [random_phase(&mut rng), random_phase(&mut rng)];
        let mu = mixed.margin(&unitary_conj(&u, &x)?)?;
        let mg = mixed.margin(&trivial_scale(&gamma, &x)?)?;
        println!("level {n}: margin {m:.6}  conjugated {mu:.6}  rotated {mg:.6}");
    }
    Ok(())
}
