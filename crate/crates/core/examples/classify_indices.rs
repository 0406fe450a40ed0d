//! Split the coordinates of a pencil into 𝔷⁺, 𝔷⁻ and 𝔑, once by
//! eigenspace containment and once by brute force on an ε grid.
//!
//!     cargo run --example classify_indices

use freespec::classify::{classify_indices, classify_oracle_grid, default_grid, two_sided_neutral};
use freespec::io;
use freespec::pencil::{EtaMode, Pencil};
use freespec::sampling::random_pencil;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn show(name: &str, p: &Pencil) {
    let c = classify_indices(p);
    let grid = classify_oracle_grid(p, &default_grid());
    println!(
        "{name:<14} 𝔷⁺={:?} 𝔷⁻={:?} 𝔑={:?}  grid agrees: {}",
        c.zplus,
        c.zminus,
        c.neutral,
        c == grid
    );
}

fn main() -> freespec::Result<()> {
    for (name, text) in io::bundled() {
        show(name, &io::parse_pencil_str(text, false)?);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut agree = 0;
    for _ in 0..100 {
        let p = random_pencil(&mut rng, 4, 3, true);
        let exact = classify_indices(&p);
        if exact == classify_oracle_grid(&p, &default_grid()) && exact.neutral == two_sided_neutral(&p, &default_grid()) {
            agree += 1;
        }
    }
    println!("random g=4 pencils: {agree}/100 agree with both oracles");

    // η radii: a zero right-only radius is the same thing as 𝔷⁺ membership.
    let chain = Pencil::chain(3);
    for k in 1..=3 {
        let r = chain.eta_radius(k, EtaMode::RightOnly)?;
        println!("chain(3) k={k} right-only η = {r:.3e}");
    }
    Ok(())
}
