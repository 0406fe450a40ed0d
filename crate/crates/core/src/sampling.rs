//! Seeded random generators for matrices, tuples and pencils.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{c64, identity, op_norm, zeros, CMatrix};
use crate::pencil::{MatrixTuple, Pencil};

/// Complex Gaussian entry with unit variance.
pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c64(re, im).scale(std::f64::consts::FRAC_1_SQRT_2)
}

pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let g = random_matrix(rng, n, n);
    (&g + g.adjoint()).scale(0.5)
}

/// Haar-distributed unitary via QR with the phases of `R` fixed.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let g = random_matrix(rng, n, n);
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let mut u = q;
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c64(1.0, 0.0) };
        let mut col = u.column_mut(j);
        col *= phase;
    }
    u
}

pub fn random_phase<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let t: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    Complex64::from_polar(1.0, t)
}

/// Random matrix with operator norm exactly `norm`.
pub fn random_with_norm<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, norm: f64) -> CMatrix {
    let m = random_matrix(rng, rows, cols);
    let s = op_norm(&m);
    if s == 0.0 {
        return zeros(rows, cols);
    }
    m.scale(norm / s)
}

/// Random contraction with norm drawn uniformly from `[0, max_norm]`.
pub fn random_contraction<R: Rng + ?Sized>(rng: &mut R, n: usize, max_norm: f64) -> CMatrix {
    let norm = rng.random_range(0.0..=max_norm);
    random_with_norm(rng, n, n, norm)
}

pub fn random_tuple<R: Rng + ?Sized>(rng: &mut R, g: usize, n: usize) -> MatrixTuple {
    MatrixTuple::from_vec((0..g).map(|_| random_matrix(rng, n, n)).collect())
        .expect("random tuple has consistent shapes")
}

pub fn random_contraction_tuple<R: Rng + ?Sized>(rng: &mut R, g: usize, n: usize, max_norm: f64) -> MatrixTuple {
    MatrixTuple::from_vec((0..g).map(|_| random_contraction(rng, n, max_norm)).collect())
        .expect("random tuple has consistent shapes")
}

pub fn random_unitary_tuple<R: Rng + ?Sized>(rng: &mut R, count: usize, n: usize) -> Vec<CMatrix> {
    (0..count).map(|_| random_unitary(rng, n)).collect()
}

/// Largest `t` in `[0, cap]` with `L_A(t·dir) ⪰ 0`, by bisection.
///
/// The feasible set is convex and contains the origin, so feasibility is
/// monotone along the ray.
pub fn boundary_scale(p: &Pencil, dir: &MatrixTuple, cap: f64) -> f64 {
    let feasible = |t: f64| {
        p.margin(&dir.scaled(t))
            .map(|m| m >= 0.0)
            .unwrap_or(false)
    };
    if feasible(cap) {
        return cap;
    }
    let (mut lo, mut hi) = (0.0, cap);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Interior point of `𝔓_A[n]`: a random direction scaled to a random
/// fraction of its boundary distance. Fractions are biased towards the
/// boundary so that tolerance-sensitive regions get sampled.
pub fn random_interior<R: Rng + ?Sized>(rng: &mut R, p: &Pencil, n: usize) -> MatrixTuple {
    let all: Vec<usize> = (1..=p.g()).collect();
    random_interior_supported(rng, p, n, &all)
}

/// Like [`random_interior`], but only the coordinates in `active` (1-based)
/// are nonzero.
pub fn random_interior_supported<R: Rng + ?Sized>(rng: &mut R, p: &Pencil, n: usize, active: &[usize]) -> MatrixTuple {
    let g = p.g();
    if active.is_empty() {
        return MatrixTuple::zeros(g, n);
    }
    loop {
        let mut mats = vec![zeros(n, n); g];
        for &j in active {
            mats[j - 1] = random_matrix(rng, n, n);
        }
        let dir = MatrixTuple::from_vec(mats).expect("consistent shapes");
        let t_star = boundary_scale(p, &dir, 1e3);
        if t_star <= 0.0 {
            continue;
        }
        let u: f64 = if rng.random_bool(0.5) {
            rng.random_range(0.9..0.9999)
        } else {
            rng.random_range(0.05..0.9)
        };
        let x = dir.scaled(u * t_star);
        if p.margin(&x).map(|m| m > crate::linalg::DEFAULT_TOL).unwrap_or(false) {
            return x;
        }
    }
}

/// Random hyper-Reinhardt pencil with `g` coordinates and block sizes up to
/// `d_max`.
///
/// With `plant_neutral` set, some consecutive blocks are built so that the
/// top singular direction of `C_j` is annihilated by `C_{j+1}^*`, which
/// produces neutral indices that generic Gaussian blocks almost never have.
///
/// Every coupling `‖C_{j+1}^* E‖` and `‖C_{j−1} F‖` between a top eigenspace
/// and its neighbor block is either planted at zero or at least
/// [`MIN_COUPLING`]; pencils in between are redrawn.
pub fn random_pencil<R: Rng + ?Sized>(rng: &mut R, g: usize, d_max: usize, plant_neutral: bool) -> Pencil {
    loop {
        let p = draw_pencil(rng, g, d_max, plant_neutral);
        if couplings(&p).iter().all(|&c| c < 1e-12 || c >= MIN_COUPLING) {
            return p;
        }
    }
}

/// Smallest nonzero coupling produced by [`random_pencil`]. An ε grid that
/// stops at `ε_min` only resolves couplings `c` with `ε_min²c²` well above
/// eigensolver round-off, so weaker couplings make the grid oracle unreliable.
pub const MIN_COUPLING: f64 = 0.05;

/// Neighbor couplings of the top eigenspaces, in no particular order.
pub fn couplings(p: &Pencil) -> Vec<f64> {
    let g = p.g();
    let mut out = Vec::new();
    for j in 1..=g {
        let c = p.block(j);
        if j < g {
            let e = crate::linalg::eigenspace(&(c.adjoint() * c), 1.0, 1e-7).expect("Gram matrix is Hermitian");
            out.push(op_norm(&(p.block(j + 1).adjoint() * e)));
        }
        if j > 1 {
            let f = crate::linalg::eigenspace(&(c * c.adjoint()), 1.0, 1e-7).expect("Gram matrix is Hermitian");
            out.push(op_norm(&(p.block(j - 1) * f)));
        }
    }
    out
}

fn draw_pencil<R: Rng + ?Sized>(rng: &mut R, g: usize, d_max: usize, plant_neutral: bool) -> Pencil {
    let dims: Vec<usize> = (0..=g).map(|_| rng.random_range(1..=d_max)).collect();
    let mut blocks: Vec<CMatrix> = Vec::with_capacity(g);
    for j in 0..g {
        let (rows, cols) = (dims[j], dims[j + 1]);
        let mut c = spiked_block(rng, rows, cols);
        if plant_neutral && j > 0 && rows >= 2 && rng.random_bool(0.5) {
            // Range of C_{j+1} orthogonal to a top eigenvector of C_j^* C_j.
            let prev: &CMatrix = &blocks[j - 1];
            let v = top_right_singular(prev);
            let proj = identity(rows) - &v * v.adjoint();
            c = &proj * c;
            let s = op_norm(&c);
            c = if s > 1e-12 { c.scale(1.0 / s) } else { spiked_block(rng, rows, cols) };
        }
        blocks.push(c);
    }
    if plant_neutral {
        // Mirror image: kernel of C_{j-1} containing a top left singular
        // vector of C_j.
        for j in 1..g {
            if dims[j] >= 2 && rng.random_bool(0.3) {
                let u = top_right_singular(&blocks[j].adjoint());
                let proj = identity(dims[j]) - &u * u.adjoint();
                let c = &blocks[j - 1] * proj;
                let s = op_norm(&c);
                if s > 1e-12 {
                    blocks[j - 1] = c.scale(1.0 / s);
                }
            }
        }
    }
    Pencil::build(dims, blocks, true).expect("random pencil is well formed")
}

/// Random norm-one block whose second singular value sits at most 0.9,
/// keeping the top eigenspace of `C^*C` well separated.
fn spiked_block<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    let u = random_unitary(rng, rows);
    let v = random_unitary(rng, cols);
    let k = rows.min(cols);
    let mut s = zeros(rows, cols);
    s[(0, 0)] = c64(1.0, 0.0);
    for i in 1..k {
        s[(i, i)] = c64(rng.random_range(0.0..0.9), 0.0);
    }
    u * s * v.adjoint()
}

fn top_right_singular(c: &CMatrix) -> CMatrix {
    let spec = crate::linalg::eigh(&(c.adjoint() * c)).expect("Gram matrix is Hermitian");
    let n = spec.eigenvectors.ncols();
    spec.eigenvectors.columns(n - 1, 1).into_owned()
}
