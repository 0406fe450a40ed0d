//! Free spectrahedra of hyper-Reinhardt pencils and their automorphisms.
//!
//! A [`pencil::Pencil`] holds norm-one blocks `C_1, …, C_g` placed on the
//! superdiagonal of a block matrix; its free spectrahedron is the set of
//! matrix tuples `X` (any size `n`) with `L_A(X) ⪰ 0`.
//!
//! - [`pencil`]: membership, margins, symmetry operations, structured boundary tuples.
//! - [`classify`]: the index sets 𝔷⁺, 𝔷⁻, 𝔑, the auxiliary pencil, and
//!   sampling detectors for polydisc summands and coordinate direct sums.
//! - [`freemap`]: Möbius-permutation candidates, their evaluation on tuples,
//!   composition, affine-linear extraction and sampled verification.
//! - [`caratheodory`]: extreme Toeplitz extensions over weighted shifts and
//!   free power series evaluated on nilpotent tuples.
//! - [`io`]: the `freespec/1` JSON formats; [`cli`]: the verbs behind the `freespec` binary.
//!
//! Every sampler takes a caller-supplied RNG, so runs are reproducible from a seed.
//!
//! ```
//! use freespec::linalg::{c64, DEFAULT_TOL};
//! use freespec::pencil::{Membership, MatrixTuple, Pencil};
//!
//! let chain = Pencil::chain(2);
//! let x = MatrixTuple::scalars(&[c64(0.5, 0.0), c64(0.5, 0.0)]);
//! assert_eq!(chain.membership(&x, DEFAULT_TOL).unwrap().kind, Membership::Interior);
//! ```

pub mod caratheodory;
pub mod classify;
pub mod cli;
pub mod error;
pub mod freemap;
pub mod io;
pub mod linalg;
pub mod pencil;
pub mod sampling;

pub use error::{Error, Result};
