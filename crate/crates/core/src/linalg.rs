//! Dense complex matrix primitives.
//!
//! Everything downstream works with [`CMatrix`], a dynamically sized
//! `nalgebra` matrix of `Complex64`. The routines here add the pieces the
//! rest of the crate needs on top of that: Kronecker products, Hermitian
//! spectra with a three-way definiteness verdict, inverse square roots and
//! spectral norms.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Default absolute tolerance on eigenvalue classification.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Relative asymmetry accepted before a matrix is rejected as non-Hermitian.
pub const HERMITIAN_SLACK: f64 = 1e-9;

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn zeros(rows: usize, cols: usize) -> CMatrix {
    CMatrix::zeros(rows, cols)
}

/// The n×n matrix unit with a one at `(row, col)` (zero-based).
pub fn matrix_unit(n: usize, row: usize, col: usize) -> CMatrix {
    let mut m = zeros(n, n);
    m[(row, col)] = Complex64::new(1.0, 0.0);
    m
}

/// The n×n nilpotent Jordan shift (ones on the first superdiagonal).
pub fn jordan_shift(n: usize) -> CMatrix {
    let mut m = zeros(n, n);
    for i in 0..n.saturating_sub(1) {
        m[(i, i + 1)] = Complex64::new(1.0, 0.0);
    }
    m
}

pub fn diag(entries: &[Complex64]) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_column_slice(entries))
}

pub fn real_diag(entries: &[f64]) -> CMatrix {
    let v: Vec<Complex64> = entries.iter().map(|&x| c64(x, 0.0)).collect();
    diag(&v)
}

/// Kronecker product. Shapes follow `(sr×sc) ⊗ (tr×tc) → (sr·tr × sc·tc)`,
/// with block `(i, j)` of the result equal to `s[(i, j)] · t`.
pub fn kron(s: &CMatrix, t: &CMatrix) -> CMatrix {
    let (tr, tc) = t.shape();
    let mut out = zeros(s.nrows() * tr, s.ncols() * tc);
    for i in 0..s.nrows() {
        for j in 0..s.ncols() {
            let sij = s[(i, j)];
            if sij == Complex64::new(0.0, 0.0) {
                continue;
            }
            let mut block = out.view_mut((i * tr, j * tc), (tr, tc));
            block.zip_apply(t, |o, x| *o = sij * x);
        }
    }
    out
}

/// Block-diagonal join `a ⊕ b`.
pub fn direct_sum(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let mut out = zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut(a.shape(), b.shape()).copy_from(b);
    out
}

/// Frobenius norm of `m - m*`.
pub fn asymmetry(m: &CMatrix) -> f64 {
    (m - m.adjoint()).norm()
}

/// ‖U*U − I‖ in Frobenius norm.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    (u.adjoint() * u - identity(u.nrows())).norm()
}

/// Largest singular value.
pub fn op_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0_f64, |acc, &s| acc.max(s))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Definiteness {
    PositiveDefinite,
    PositiveSemidefiniteWithKernel,
    Indefinite,
}

/// Definiteness verdict together with the smallest eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsdClass {
    pub kind: Definiteness,
    pub margin: f64,
}

impl PsdClass {
    pub fn from_margin(margin: f64, tol: f64) -> Self {
        let kind = if margin > tol {
            Definiteness::PositiveDefinite
        } else if margin >= -tol {
            Definiteness::PositiveSemidefiniteWithKernel
        } else {
            Definiteness::Indefinite
        };
        PsdClass { kind, margin }
    }

    pub fn is_psd(&self) -> bool {
        self.kind != Definiteness::Indefinite
    }
}

/// Eigenvalues in ascending order with matching orthonormal eigenvectors
/// stored column-wise.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl SpectralData {
    pub fn reconstruct(&self) -> CMatrix {
        let lam: Vec<Complex64> = self.eigenvalues.iter().map(|&x| c64(x, 0.0)).collect();
        &self.eigenvectors * diag(&lam) * self.eigenvectors.adjoint()
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(f64::INFINITY)
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(f64::NEG_INFINITY)
    }
}

#[derive(Debug, Clone)]
pub struct HermitianSpectrum {
    pub spectral: SpectralData,
    pub class: PsdClass,
    /// Eigenvectors whose eigenvalue has modulus at most `tol`, column-wise.
    pub kernel: CMatrix,
}

fn check_hermitian(m: &CMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::Shape(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let asym = asymmetry(m);
    if asym > HERMITIAN_SLACK * (1.0 + m.norm()) {
        return Err(Error::NotHermitian { asymmetry: asym });
    }
    Ok(())
}

/// Ascending eigen-decomposition of a Hermitian matrix. Inputs within the
/// asymmetry slack are symmetrized before decomposition.
pub fn eigh(m: &CMatrix) -> Result<SpectralData> {
    check_hermitian(m)?;
    let n = m.nrows();
    if n == 0 {
        return Ok(SpectralData {
            eigenvalues: Vec::new(),
            eigenvectors: zeros(0, 0),
        });
    }
    let sym = (m + m.adjoint()).scale(0.5);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut eigenvectors = zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(SpectralData {
        eigenvalues,
        eigenvectors,
    })
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &CMatrix) -> Result<f64> {
    Ok(eigh(m)?.min())
}

/// Spectrum, definiteness class and kernel basis of a Hermitian matrix.
pub fn hermitian_spectrum(m: &CMatrix, tol: f64) -> Result<HermitianSpectrum> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let spectral = eigh(m)?;
    let class = PsdClass::from_margin(spectral.min(), tol);
    let kernel_cols: Vec<usize> = spectral
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &lam)| lam.abs() <= tol)
        .map(|(i, _)| i)
        .collect();
    let mut kernel = zeros(m.nrows(), kernel_cols.len());
    for (dst, &src) in kernel_cols.iter().enumerate() {
        kernel.set_column(dst, &spectral.eigenvectors.column(src));
    }
    Ok(HermitianSpectrum {
        spectral,
        class,
        kernel,
    })
}

/// Default classification tolerance scaled to the matrix size.
pub fn default_tol(m: &CMatrix) -> f64 {
    DEFAULT_TOL * (1.0 + m.norm())
}

/// `M^{-1/2}` for Hermitian positive definite `M`.
pub fn inv_sqrt(m: &CMatrix, tol: f64) -> Result<CMatrix> {
    let spec = eigh(m)?;
    let lam_min = spec.min();
    if !(lam_min > tol) {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: lam_min,
        });
    }
    let scales: Vec<Complex64> = spec
        .eigenvalues
        .iter()
        .map(|&x| c64(1.0 / x.sqrt(), 0.0))
        .collect();
    let v = &spec.eigenvectors;
    let r = v * diag(&scales) * v.adjoint();
    Ok((&r + r.adjoint()).scale(0.5))
}

/// Orthonormal basis (column-wise) for the eigenspace of Hermitian `m`
/// at eigenvalue `target`, using threshold `tol` on `|λ − target|`.
pub fn eigenspace(m: &CMatrix, target: f64, tol: f64) -> Result<CMatrix> {
    let spec = eigh(m)?;
    let cols: Vec<usize> = spec
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &lam)| (lam - target).abs() <= tol)
        .map(|(i, _)| i)
        .collect();
    let mut basis = zeros(m.nrows(), cols.len());
    for (dst, &src) in cols.iter().enumerate() {
        basis.set_column(dst, &spec.eigenvectors.column(src));
    }
    Ok(basis)
}

/// Maximum absolute entry.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{random_hermitian, random_matrix};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn r(re: f64) -> Complex64 {
        c64(re, 0.0)
    }

    #[test]
    fn kron_identity_is_block_diagonal() {
        let m = CMatrix::from_row_slice(2, 2, &[r(1.0), c64(0.0, 2.0), r(3.0), r(4.0)]);
        let k = kron(&identity(2), &m);
        assert_eq!(k, direct_sum(&m, &m));
    }

    #[test]
    fn kron_scalar_second_factor() {
        let s = jordan_shift(2);
        let t = CMatrix::from_element(1, 1, r(2.0));
        let k = kron(&s, &t);
        assert_eq!(k, CMatrix::from_row_slice(2, 2, &[r(0.0), r(2.0), r(0.0), r(0.0)]));
    }

    #[test]
    fn kron_rectangular_shape_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = random_matrix(&mut rng, 2, 3);
        let t = random_matrix(&mut rng, 4, 1);
        let k = kron(&s, &t);
        assert_eq!(k.shape(), (8, 3));
        assert_eq!(k[(5, 2)], s[(1, 2)] * t[(1, 0)]);
    }

    #[test]
    fn kron_adjoint_commutes() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let s = random_matrix(&mut rng, 2, 2);
            let t = random_matrix(&mut rng, 2, 2);
            let lhs = kron(&s, &t).adjoint();
            let rhs = kron(&s.adjoint(), &t.adjoint());
            assert!((lhs - rhs).norm() < 1e-14);
        }
    }

    #[test]
    fn spectrum_of_identity() {
        let h = hermitian_spectrum(&identity(3), DEFAULT_TOL).unwrap();
        assert_eq!(h.class.kind, Definiteness::PositiveDefinite);
        assert!((h.class.margin - 1.0).abs() < 1e-14);
        assert_eq!(h.kernel.ncols(), 0);
    }

    #[test]
    fn spectrum_rank_one_has_kernel() {
        let m = CMatrix::from_row_slice(2, 2, &[r(1.0), r(1.0), r(1.0), r(1.0)]);
        let h = hermitian_spectrum(&m, DEFAULT_TOL).unwrap();
        assert_eq!(h.class.kind, Definiteness::PositiveSemidefiniteWithKernel);
        assert_eq!(h.kernel.ncols(), 1);
        let v = h.kernel.column(0);
        // span of (1,-1)/sqrt 2, up to phase
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!(((v[0] + v[1]).norm()) < 1e-12);
        assert!((v[0].norm() - s).abs() < 1e-12);
    }

    #[test]
    fn spectrum_indefinite() {
        let m = CMatrix::from_row_slice(2, 2, &[r(1.0), r(2.0), r(2.0), r(1.0)]);
        let h = hermitian_spectrum(&m, DEFAULT_TOL).unwrap();
        assert_eq!(h.class.kind, Definiteness::Indefinite);
        assert!((h.class.margin + 1.0).abs() < 1e-12);
        assert!((h.spectral.max() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = jordan_shift(2);
        match hermitian_spectrum(&m, DEFAULT_TOL) {
            Err(Error::NotHermitian { asymmetry }) => assert!((asymmetry - 2f64.sqrt()).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn spectrum_reconstructs_random_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [1, 2, 5, 11, 24] {
            let m = random_hermitian(&mut rng, n);
            let spec = eigh(&m).unwrap();
            let v = &spec.eigenvectors;
            assert!((v.adjoint() * v - identity(n)).norm() < 1e-10);
            assert!((spec.reconstruct() - &m).norm() <= 1e-9 * op_norm(&m));
            assert!(spec.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn inv_sqrt_cases() {
        assert!((inv_sqrt(&identity(3), DEFAULT_TOL).unwrap() - identity(3)).norm() < 1e-14);
        let d = inv_sqrt(&real_diag(&[4.0, 9.0]), DEFAULT_TOL).unwrap();
        assert!((d - real_diag(&[0.5, 1.0 / 3.0])).norm() < 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = random_matrix(&mut rng, 3, 3);
        let p = &g * g.adjoint() + identity(3).scale(0.1);
        let r = inv_sqrt(&p, DEFAULT_TOL).unwrap();
        assert!((&r * &p * &r - identity(3)).norm() <= 1e-8);
        assert!(asymmetry(&r) < 1e-12);
    }

    #[test]
    fn inv_sqrt_rejects_singular() {
        let m = real_diag(&[1.0, 0.0]);
        assert!(matches!(
            inv_sqrt(&m, DEFAULT_TOL),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn op_norm_cases() {
        assert_eq!(op_norm(&zeros(3, 3)), 0.0);
        assert!((op_norm(&jordan_shift(2)) - 1.0).abs() < 1e-14);
        let x = CMatrix::from_row_slice(2, 2, &[r(0.5), r(0.75), r(0.0), r(0.5)]);
        assert!((op_norm(&x) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn op_norm_matches_gram_eigenvalue() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let m = random_matrix(&mut rng, 4, 3);
            let n = op_norm(&m);
            let lam = eigh(&(m.adjoint() * &m)).unwrap().max();
            assert!((n * n - lam).abs() <= 1e-10 * lam);
        }
    }

    #[test]
    fn kron_mixed_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let (s, u) = (random_matrix(&mut rng, 2, 3), random_matrix(&mut rng, 3, 2));
            let (t, v) = (random_matrix(&mut rng, 3, 2), random_matrix(&mut rng, 2, 4));
            let lhs = kron(&s, &t) * kron(&u, &v);
            let rhs = kron(&(&s * &u), &(&t * &v));
            assert!((lhs - rhs).norm() < 1e-10);
        }
    }

    #[test]
    fn op_norm_is_multiplicative_on_kron() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let s = random_matrix(&mut rng, 3, 3);
            let t = random_matrix(&mut rng, 2, 2);
            let k = op_norm(&kron(&s, &t));
            assert!((k - op_norm(&s) * op_norm(&t)).abs() <= 1e-9 * k);
        }
    }

    #[test]
    fn kernel_of_r_annihilates_q_when_r_plus_minus_q_psd() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..30 {
            let n = 4;
            let u = crate::sampling::random_unitary(&mut rng, n);
            let mut d = vec![0.0_f64; n];
            for x in d.iter_mut().skip(1) {
                *x = rand::Rng::random_range(&mut rng, 0.1..2.0);
            }
            let root: Vec<f64> = d.iter().map(|x| x.sqrt()).collect();
            let r_half = &u * real_diag(&root) * u.adjoint();
            let r = &u * real_diag(&d) * u.adjoint();
            let k = random_hermitian(&mut rng, n);
            let k = k.scale(0.999 / op_norm(&k));
            let q = &r_half * k * &r_half;
            assert!(min_eigenvalue(&(&r + &q)).unwrap() >= -1e-10);
            assert!(min_eigenvalue(&(&r - &q)).unwrap() >= -1e-10);
            let h = hermitian_spectrum(&r, 1e-8).unwrap();
            assert_eq!(h.kernel.ncols(), 1);
            assert!((&q * &h.kernel).norm() <= 1e-7 * op_norm(&q));
        }
    }
}
