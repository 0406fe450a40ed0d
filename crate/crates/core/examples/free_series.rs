//! Free power series evaluated on nilpotent tuples, checked against the
//! closed-form matrix Möbius map.
//!
//!     cargo run --example free_series

use freespec::caratheodory::{eval_free_series, nilpotent_shift_family, word_power, FreeSeries};
use freespec::freemap::mobius_matrix;
use freespec::linalg::{c64, jordan_shift};
use freespec::pencil::MatrixTuple;

fn main() -> freespec::Result<()> {
    for b in [0.0, 0.3, 0.7] {
        for n in 1..=5 {
            let series = FreeSeries::mobius(1, 1, c64(b, 0.0), 0.4, n)?;
            let s = MatrixTuple::from_vec(vec![jordan_shift(n + 1)])?;
            let lhs = eval_free_series(&series, &s, true)?;
            let rhs = mobius_matrix(c64(b, 0.0), 0.4, s.coord(1))?;
            println!("b = {b}, N = {n}: ‖series − closed form‖ = {:.1e}", (lhs - rhs).norm());
        }
    }

    // Distinct weights separate words through the corner entry.
    let w = vec![
        vec![c64(1.0, 0.0), c64(2.0, 0.0)],
        vec![c64(3.0, 0.0), c64(5.0, 0.0)],
    ];
    let t = nilpotent_shift_family(2, 2, &w, 1)?;
    for word in [[1, 1], [1, 2], [2, 1], [2, 2]] {
        println!("corner of T^{word:?} = {}", word_power(&t, &word)[(0, 2)].re);
    }
    Ok(())
}
