//! Hyper-Reinhardt pencils and the membership oracle.
//!
//! A [`Pencil`] is fixed by block sizes `d_1, …, d_{g+1}` and norm-one
//! blocks `C_j` of size `d_j × d_{j+1}`. The assembled coefficient `A_j` is
//! the `d × d` block matrix whose only nonzero block is `C_j` at block
//! position `(j, j+1)`. For a tuple `X` of `n × n` matrices,
//!
//! ```text
//! Λ_A(X) = Σ_j A_j ⊗ X_j,      L_A(X) = I + Λ_A(X) + Λ_A(X)*,
//! ```
//!
//! and `X` lies in the free spectrahedron when `L_A(X) ≻ 0`.
//!
//! Coordinates are numbered `1..=g` throughout the public API; unitary
//! tuples for [`w_compose`] are numbered `0..=g`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    self, c64, hermitian_spectrum, identity, jordan_shift, kron, matrix_unit, op_norm, real_diag,
    unitarity_defect, zeros, CMatrix, PsdClass, DEFAULT_TOL,
};

/// Tolerance on `‖C_j‖ = 1` accepted without rescaling.
pub const NORM_SLACK: f64 = 1e-8;

/// A `g`-tuple of square matrices sharing one size (the level).
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixTuple {
    matrices: Vec<CMatrix>,
    level: usize,
}

impl MatrixTuple {
    pub fn from_vec(matrices: Vec<CMatrix>) -> Result<Self> {
        let level = matrices.first().map(|m| m.nrows()).unwrap_or(0);
        for (j, m) in matrices.iter().enumerate() {
            if m.nrows() != level || m.ncols() != level {
                return Err(Error::Shape(format!(
                    "coordinate {} is {}x{}, expected {level}x{level}",
                    j + 1,
                    m.nrows(),
                    m.ncols()
                )));
            }
            if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "coordinate {} has non-finite entries",
                    j + 1
                )));
            }
        }
        Ok(MatrixTuple { matrices, level })
    }

    pub fn zeros(g: usize, n: usize) -> Self {
        MatrixTuple {
            matrices: vec![zeros(n, n); g],
            level: n,
        }
    }

    /// Level-one tuple from scalars.
    pub fn scalars(values: &[Complex64]) -> Self {
        MatrixTuple {
            matrices: values.iter().map(|&z| CMatrix::from_element(1, 1, z)).collect(),
            level: 1,
        }
    }

    pub fn real_scalars(values: &[f64]) -> Self {
        let v: Vec<Complex64> = values.iter().map(|&x| c64(x, 0.0)).collect();
        Self::scalars(&v)
    }

    /// Tuple with `m` in coordinate `k` (1-based) and zeros elsewhere.
    pub fn single(g: usize, k: usize, m: CMatrix) -> Self {
        let n = m.nrows();
        let mut t = Self::zeros(g, n);
        t.matrices[k - 1] = m;
        t
    }

    pub fn g(&self) -> usize {
        self.matrices.len()
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn matrices(&self) -> &[CMatrix] {
        &self.matrices
    }

    pub fn into_matrices(self) -> Vec<CMatrix> {
        self.matrices
    }

    /// Coordinate `j`, 1-based.
    pub fn coord(&self, j: usize) -> &CMatrix {
        &self.matrices[j - 1]
    }

    pub fn set_coord(&mut self, j: usize, m: CMatrix) -> Result<()> {
        if m.nrows() != self.level || m.ncols() != self.level {
            return Err(Error::Shape(format!(
                "replacement is {}x{}, expected {}x{}",
                m.nrows(),
                m.ncols(),
                self.level,
                self.level
            )));
        }
        self.matrices[j - 1] = m;
        Ok(())
    }

    pub fn scaled(&self, t: f64) -> Self {
        self.map(|m| m.scale(t))
    }

    pub fn map(&self, f: impl Fn(&CMatrix) -> CMatrix) -> Self {
        MatrixTuple {
            matrices: self.matrices.iter().map(f).collect(),
            level: self.level,
        }
    }

    pub fn add(&self, other: &MatrixTuple) -> Result<Self> {
        check_same_shape(self, other)?;
        Ok(MatrixTuple {
            matrices: self
                .matrices
                .iter()
                .zip(&other.matrices)
                .map(|(a, b)| a + b)
                .collect(),
            level: self.level,
        })
    }

    /// Largest coordinate distance in Frobenius norm.
    pub fn distance(&self, other: &MatrixTuple) -> f64 {
        self.matrices
            .iter()
            .zip(&other.matrices)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Spectral norms of the coordinates.
    pub fn norms(&self) -> Vec<f64> {
        self.matrices.iter().map(op_norm).collect()
    }
}

fn check_same_shape(a: &MatrixTuple, b: &MatrixTuple) -> Result<()> {
    if a.g() != b.g() || a.level != b.level {
        return Err(Error::Shape(format!(
            "tuples differ: g={} level={} vs g={} level={}",
            a.g(),
            a.level,
            b.g(),
            b.level
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Membership {
    Interior,
    Boundary,
    Outside,
}

#[derive(Debug, Clone)]
pub struct MembershipVerdict {
    pub kind: Membership,
    /// Smallest eigenvalue of `L_A(X)`.
    pub margin: f64,
    /// Kernel basis of `L_A(X)` when the verdict is `Boundary`.
    pub kernel: Option<CMatrix>,
}

impl MembershipVerdict {
    pub fn in_closure(&self) -> bool {
        self.kind != Membership::Outside
    }
}

/// Evaluate `I + Σ B_j⊗X_j + (Σ B_j⊗X_j)*` for arbitrary square coefficients.
pub fn general_l_eval(coeffs: &[CMatrix], x: &MatrixTuple) -> Result<CMatrix> {
    if coeffs.len() != x.g() {
        return Err(Error::Shape(format!(
            "tuple has {} coordinates, pencil has {}",
            x.g(),
            coeffs.len()
        )));
    }
    let d = coeffs.first().map(|b| b.nrows()).unwrap_or(0);
    let mut lam = zeros(d * x.level(), d * x.level());
    for (b, xj) in coeffs.iter().zip(x.matrices()) {
        lam += kron(b, xj);
    }
    Ok(identity(d * x.level()) + &lam + lam.adjoint())
}

fn verdict_from(l: &CMatrix, tol: f64) -> Result<MembershipVerdict> {
    let h = hermitian_spectrum(l, tol)?;
    let kind = match h.class.kind {
        linalg::Definiteness::PositiveDefinite => Membership::Interior,
        linalg::Definiteness::PositiveSemidefiniteWithKernel => Membership::Boundary,
        linalg::Definiteness::Indefinite => Membership::Outside,
    };
    Ok(MembershipVerdict {
        kind,
        margin: h.class.margin,
        kernel: (kind == Membership::Boundary).then_some(h.kernel),
    })
}

/// A linear matrix inequality with general square coefficients.
#[derive(Debug, Clone)]
pub struct GeneralPencil {
    pub coeffs: Vec<CMatrix>,
}

impl GeneralPencil {
    pub fn g(&self) -> usize {
        self.coeffs.len()
    }

    pub fn l_eval(&self, x: &MatrixTuple) -> Result<CMatrix> {
        general_l_eval(&self.coeffs, x)
    }

    pub fn membership(&self, x: &MatrixTuple, tol: f64) -> Result<MembershipVerdict> {
        verdict_from(&self.l_eval(x)?, tol)
    }

    pub fn margin(&self, x: &MatrixTuple) -> Result<f64> {
        linalg::min_eigenvalue(&self.l_eval(x)?)
    }

    /// Largest `r ∈ [0, cap]` with `L(r·δ_j) ⪰ 0` for every coordinate
    /// direction, i.e. the scalar radius along the positive real axes; for a
    /// one-variable pencil this is the radius of its level-one disc.
    pub fn scalar_radius(&self, cap: f64) -> f64 {
        let g = self.g();
        (1..=g)
            .map(|j| {
                let feasible = |t: f64| {
                    let mut v = vec![0.0; g];
                    v[j - 1] = t;
                    self.margin(&MatrixTuple::real_scalars(&v))
                        .map(|m| m >= -1e-12)
                        .unwrap_or(false)
                };
                bisect_sup(feasible, cap)
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// `sup { t ∈ [0, cap] : feasible(t) }` for a monotone predicate with
/// `feasible(0)` assumed true.
pub(crate) fn bisect_sup(feasible: impl Fn(f64) -> bool, cap: f64) -> f64 {
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

/// A hyper-Reinhardt pencil.
#[derive(Debug, Clone)]
pub struct Pencil {
    dims: Vec<usize>,
    blocks: Vec<CMatrix>,
    offsets: Vec<usize>,
    coeffs: Vec<CMatrix>,
}

impl Pencil {
    /// Build from block sizes and blocks, requiring `‖C_j‖ = 1` to within
    /// [`NORM_SLACK`].
    pub fn new(dims: Vec<usize>, blocks: Vec<CMatrix>) -> Result<Self> {
        Self::build(dims, blocks, false)
    }

    /// Build a pencil; with `rescale` every block is normalized to norm one.
    pub fn build(dims: Vec<usize>, blocks: Vec<CMatrix>, rescale: bool) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidArgument("a pencil needs at least one block".into()));
        }
        if dims.len() != blocks.len() + 1 {
            return Err(Error::Shape(format!(
                "{} blocks need {} dims, got {}",
                blocks.len(),
                blocks.len() + 1,
                dims.len()
            )));
        }
        if let Some(pos) = dims.iter().position(|&d| d == 0) {
            return Err(Error::Shape(format!("d_{} must be positive", pos + 1)));
        }
        let mut blocks = blocks;
        for (j, c) in blocks.iter_mut().enumerate() {
            let expect = (dims[j], dims[j + 1]);
            if c.shape() != expect {
                return Err(Error::Shape(format!(
                    "C_{} is {}x{}, expected d_{}×d_{} = {}x{}",
                    j + 1,
                    c.nrows(),
                    c.ncols(),
                    j + 1,
                    j + 2,
                    expect.0,
                    expect.1
                )));
            }
            let norm = op_norm(c);
            if rescale {
                if norm == 0.0 || !norm.is_finite() {
                    return Err(Error::NormViolation { block: j + 1, norm });
                }
                *c = c.scale(1.0 / norm);
            } else if (norm - 1.0).abs() > NORM_SLACK {
                return Err(Error::NormViolation { block: j + 1, norm });
            }
        }
        let mut offsets = Vec::with_capacity(dims.len());
        let mut acc = 0;
        for &d in &dims {
            offsets.push(acc);
            acc += d;
        }
        let total = acc;
        let coeffs = blocks
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let mut a = zeros(total, total);
                a.view_mut((offsets[j], offsets[j + 1]), c.shape()).copy_from(c);
                a
            })
            .collect();
        Ok(Pencil {
            dims,
            blocks,
            offsets,
            coeffs,
        })
    }

    /// The free disc: `dims = [1, 1]`, `C_1 = [1]`.
    pub fn disc() -> Self {
        Self::chain(1)
    }

    /// Scalar chain pencil: all `d_j = 1`, all `C_j = [1]`.
    pub fn chain(g: usize) -> Self {
        let one = CMatrix::from_element(1, 1, c64(1.0, 0.0));
        Self::new(vec![1; g + 1], vec![one; g]).expect("chain pencil is valid")
    }

    /// `dims = [2, 2, 2]`, `C_1 = diag(1, 0)`, `C_2 = diag(0, 1)`: two
    /// decoupled discs.
    pub fn split() -> Self {
        Self::new(
            vec![2, 2, 2],
            vec![real_diag(&[1.0, 0.0]), real_diag(&[0.0, 1.0])],
        )
        .expect("split pencil is valid")
    }

    /// Hyper-Reinhardt realization of the free polydisc `𝓕^g`: every
    /// `d_j = g` and `C_j = E_{jj}`, so each coordinate drives its own
    /// independent disc.
    pub fn polydisc(g: usize) -> Self {
        let blocks = (0..g).map(|j| matrix_unit(g, j, j)).collect();
        Self::new(vec![g; g + 1], blocks).expect("polydisc pencil is valid")
    }

    pub fn g(&self) -> usize {
        self.blocks.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Total size `d = Σ d_j`.
    pub fn d(&self) -> usize {
        self.dims.iter().sum()
    }

    /// `C_j`, 1-based.
    pub fn block(&self, j: usize) -> &CMatrix {
        &self.blocks[j - 1]
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    /// Assembled `A_j`, 1-based.
    pub fn coeff(&self, j: usize) -> &CMatrix {
        &self.coeffs[j - 1]
    }

    pub fn coeffs(&self) -> &[CMatrix] {
        &self.coeffs
    }

    pub fn as_general(&self) -> GeneralPencil {
        GeneralPencil {
            coeffs: self.coeffs.clone(),
        }
    }

    pub(crate) fn check_index(&self, j: usize) -> Result<()> {
        if j == 0 || j > self.g() {
            return Err(Error::IndexOutOfRange {
                index: j,
                max: self.g(),
            });
        }
        Ok(())
    }

    fn check_tuple(&self, x: &MatrixTuple) -> Result<()> {
        if x.g() != self.g() {
            return Err(Error::Shape(format!(
                "tuple has {} coordinates, pencil has g = {}",
                x.g(),
                self.g()
            )));
        }
        if x.level() == 0 {
            return Err(Error::Shape("tuple level must be at least 1".into()));
        }
        Ok(())
    }

    /// `Λ_A(X) = Σ_j A_j ⊗ X_j`, a `dn × dn` matrix.
    pub fn lambda_eval(&self, x: &MatrixTuple) -> Result<CMatrix> {
        self.check_tuple(x)?;
        let n = x.level();
        let mut out = zeros(self.d() * n, self.d() * n);
        for (j, (c, xj)) in self.blocks.iter().zip(x.matrices()).enumerate() {
            let block = kron(c, xj);
            out.view_mut((self.offsets[j] * n, self.offsets[j + 1] * n), block.shape())
                .copy_from(&block);
        }
        Ok(out)
    }

    /// `L_A(X) = I + Λ_A(X) + Λ_A(X)*`.
    pub fn l_eval(&self, x: &MatrixTuple) -> Result<CMatrix> {
        let lam = self.lambda_eval(x)?;
        Ok(identity(lam.nrows()) + &lam + lam.adjoint())
    }

    /// Smallest eigenvalue of `L_A(X)`.
    pub fn margin(&self, x: &MatrixTuple) -> Result<f64> {
        linalg::min_eigenvalue(&self.l_eval(x)?)
    }

    /// Three-way membership verdict with absolute tolerance `tol` on the
    /// smallest eigenvalue of `L_A(X)`.
    pub fn membership(&self, x: &MatrixTuple, tol: f64) -> Result<MembershipVerdict> {
        verdict_from(&self.l_eval(x)?, tol)
    }

    /// `I − (C_j^*C_j ⊗ T_j^*T_j + C_{j+1}C_{j+1}^* ⊗ T_{j+1}T_{j+1}^*)`,
    /// which is positive semidefinite whenever `L_A(T)` is.
    pub fn link_inequality(&self, t: &MatrixTuple, j: usize, tol: f64) -> Result<(CMatrix, PsdClass)> {
        self.check_tuple(t)?;
        if j == 0 || j >= self.g() {
            return Err(Error::IndexOutOfRange {
                index: j,
                max: self.g().saturating_sub(1),
            });
        }
        let cj = self.block(j);
        let cn = self.block(j + 1);
        let tj = t.coord(j);
        let tn = t.coord(j + 1);
        let sum = kron(&(cj.adjoint() * cj), &(tj.adjoint() * tj))
            + kron(&(cn * cn.adjoint()), &(tn * tn.adjoint()));
        let m = identity(sum.nrows()) - sum;
        let class = PsdClass::from_margin(linalg::min_eigenvalue(&m)?, tol);
        Ok((m, class))
    }

    /// Largest `η ∈ [0, 2]` with `L_A(δ_k + η Σ_{j≠k} δ_j) ⪰ 0` (level one).
    ///
    /// `RightOnly` also zeroes coordinate `k−1` and `LeftOnly` zeroes
    /// `k+1`. When no coordinate is left to perturb the result is
    /// `f64::INFINITY`.
    pub fn eta_radius(&self, k: usize, mode: EtaMode) -> Result<f64> {
        self.check_index(k)?;
        let g = self.g();
        let others: Vec<usize> = (1..=g)
            .filter(|&j| j != k)
            .filter(|&j| !(mode == EtaMode::RightOnly && j + 1 == k))
            .filter(|&j| !(mode == EtaMode::LeftOnly && j == k + 1))
            .collect();
        if others.is_empty() {
            return Ok(f64::INFINITY);
        }
        let feasible = |eta: f64| {
            let mut v = vec![0.0; g];
            v[k - 1] = 1.0;
            for &j in &others {
                v[j - 1] = eta;
            }
            self.margin(&MatrixTuple::real_scalars(&v))
                .map(|m| m >= -scaled_psd_tol(eta))
                .unwrap_or(false)
        };
        Ok(bisect_sup(feasible, 2.0))
    }

    /// The structured test tuples used to probe automorphism candidates.
    pub fn structured_boundary_tuples(&self, kind: StructuredKind, k: usize) -> Result<Vec<MatrixTuple>> {
        self.check_index(k)?;
        let g = self.g();
        let invalid = || {
            Error::InvalidArgument(format!("{kind:?} is not defined at k = {k} for g = {g}"))
        };
        let s2 = jordan_shift(2);
        match kind {
            StructuredKind::SingleShift => Ok(vec![MatrixTuple::single(g, k, s2)]),
            StructuredKind::AdjacentPair => {
                if k + 1 > g {
                    return Err(invalid());
                }
                let mut t = MatrixTuple::single(g, k, s2.clone());
                t.set_coord(k + 1, s2)?;
                Ok(vec![t])
            }
            StructuredKind::Staggered => {
                if k < 2 {
                    return Err(invalid());
                }
                let mut t = MatrixTuple::single(g, k, matrix_unit(3, 0, 1));
                t.set_coord(k - 1, matrix_unit(3, 1, 2))?;
                Ok(vec![t])
            }
            StructuredKind::EpsilonPair => {
                if g < 2 {
                    return Err(invalid());
                }
                let j3 = jordan_shift(3);
                let mut out = Vec::new();
                if k < g {
                    let eps = self.one_sided_radius(k, k + 1);
                    for e in epsilon_choices(eps) {
                        let mut w = zeros(3, 3);
                        w[(0, 1)] = c64(1.0, 0.0);
                        w[(1, 2)] = c64(e, 0.0);
                        let mut t = MatrixTuple::single(g, k, j3.clone());
                        t.set_coord(k + 1, w)?;
                        out.push(t);
                    }
                }
                if k > 1 {
                    let eps = self.one_sided_radius(k, k - 1);
                    for e in epsilon_choices(eps) {
                        let mut w = zeros(3, 3);
                        w[(0, 1)] = c64(e, 0.0);
                        w[(1, 2)] = c64(1.0, 0.0);
                        let mut t = MatrixTuple::single(g, k, j3.clone());
                        t.set_coord(k - 1, w)?;
                        out.push(t);
                    }
                }
                Ok(out)
            }
        }
    }

    /// Largest `ε ∈ [0, 1]` with `L_A(δ_k + ε δ_neighbor) ⪰ 0`.
    pub fn one_sided_radius(&self, k: usize, neighbor: usize) -> f64 {
        let g = self.g();
        let feasible = |eps: f64| {
            let mut v = vec![0.0; g];
            v[k - 1] = 1.0;
            v[neighbor - 1] = eps;
            self.margin(&MatrixTuple::real_scalars(&v))
                .map(|m| m >= -scaled_psd_tol(eps))
                .unwrap_or(false)
        };
        bisect_sup(feasible, 1.0)
    }
}

/// PSD slack used when a feasibility question is asked at a small
/// perturbation size `x`: violations along the boundary scale like `x²`, so
/// the slack shrinks quadratically, capped at `1e-10`.
pub fn scaled_psd_tol(x: f64) -> f64 {
    (1e-4 * x * x).min(1e-10)
}

fn epsilon_choices(radius: f64) -> Vec<f64> {
    if radius <= 1e-6 {
        Vec::new()
    } else {
        let r = radius * (1.0 - 1e-9);
        vec![r, 0.5 * r]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EtaMode {
    Full,
    RightOnly,
    LeftOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StructuredKind {
    /// `T_k = S` (the 2×2 shift), all other coordinates zero.
    SingleShift,
    /// `T_k = T_{k+1} = S`.
    AdjacentPair,
    /// 3×3 matrix units `T_k = E_12`, `T_{k-1} = E_23`.
    Staggered,
    /// 3×3 pairs: `T_k` the Jordan shift and a neighbor carrying weight `ε`
    /// for which `L_A(δ_k + ε δ_neighbor) ⪰ 0`.
    EpsilonPair,
}

impl StructuredKind {
    pub const ALL: [StructuredKind; 4] = [
        StructuredKind::SingleShift,
        StructuredKind::AdjacentPair,
        StructuredKind::Staggered,
        StructuredKind::EpsilonPair,
    ];
}

/// Coordinatewise block-diagonal join `X ⊕ Y`.
pub fn direct_sum(x: &MatrixTuple, y: &MatrixTuple) -> Result<MatrixTuple> {
    if x.g() != y.g() {
        return Err(Error::Shape(format!(
            "cannot join tuples with g = {} and g = {}",
            x.g(),
            y.g()
        )));
    }
    MatrixTuple::from_vec(
        x.matrices()
            .iter()
            .zip(y.matrices())
            .map(|(a, b)| linalg::direct_sum(a, b))
            .collect(),
    )
}

fn check_unitary(u: &CMatrix) -> Result<()> {
    let deviation = unitarity_defect(u);
    if deviation > DEFAULT_TOL {
        return Err(Error::NotUnitary { deviation });
    }
    Ok(())
}

/// `(U^*X_1U, …, U^*X_gU)`.
pub fn unitary_conj(u: &CMatrix, x: &MatrixTuple) -> Result<MatrixTuple> {
    check_unitary(u)?;
    if u.nrows() != x.level() {
        return Err(Error::Shape(format!(
            "unitary is {}x{}, tuple level is {}",
            u.nrows(),
            u.ncols(),
            x.level()
        )));
    }
    let ua = u.adjoint();
    Ok(x.map(|m| &ua * m * u))
}

/// `γ·X = (γ_1X_1, …, γ_gX_g)` for unimodular `γ`.
pub fn trivial_scale(gamma: &[Complex64], x: &MatrixTuple) -> Result<MatrixTuple> {
    if gamma.len() != x.g() {
        return Err(Error::Shape(format!(
            "{} phases for a tuple with g = {}",
            gamma.len(),
            x.g()
        )));
    }
    for (i, z) in gamma.iter().enumerate() {
        if (z.norm() - 1.0).abs() > 1e-10 {
            return Err(Error::NotUnimodular {
                index: i + 1,
                modulus: z.norm(),
            });
        }
    }
    MatrixTuple::from_vec(
        x.matrices()
            .iter()
            .zip(gamma)
            .map(|(m, &z)| m * z)
            .collect(),
    )
}

/// `W∘T = (W_0^*T_1W_1, W_1^*T_2W_2, …, W_{g-1}^*T_gW_g)`.
pub fn w_compose(w: &[CMatrix], t: &MatrixTuple) -> Result<MatrixTuple> {
    if w.len() != t.g() + 1 {
        return Err(Error::Shape(format!(
            "need {} unitaries for g = {}, got {}",
            t.g() + 1,
            t.g(),
            w.len()
        )));
    }
    for u in w {
        check_unitary(u)?;
        if u.nrows() != t.level() {
            return Err(Error::Shape(format!(
                "unitary is {}x{}, tuple level is {}",
                u.nrows(),
                u.ncols(),
                t.level()
            )));
        }
    }
    MatrixTuple::from_vec(
        t.matrices()
            .iter()
            .enumerate()
            .map(|(j, m)| w[j].adjoint() * m * &w[j + 1])
            .collect(),
    )
}

/// `π_𝔍(T)`: zero the coordinates in `set` (1-based), copy the rest.
pub fn project(set: &[usize], t: &MatrixTuple) -> Result<MatrixTuple> {
    let g = t.g();
    if let Some(&bad) = set.iter().find(|&&j| j == 0 || j > g) {
        return Err(Error::IndexOutOfRange { index: bad, max: g });
    }
    let n = t.level();
    Ok(MatrixTuple {
        matrices: t
            .matrices()
            .iter()
            .enumerate()
            .map(|(i, m)| if set.contains(&(i + 1)) { zeros(n, n) } else { m.clone() })
            .collect(),
        level: n,
    })
}

/// `D_W`: block diagonal with `I_{d_{j+1}} ⊗ W_j` in block `j+1`.
pub fn d_w(p: &Pencil, w: &[CMatrix]) -> CMatrix {
    let blocks: Vec<CMatrix> = p
        .dims()
        .iter()
        .zip(w)
        .map(|(&dj, wj)| kron(&identity(dj), wj))
        .collect();
    blocks
        .iter()
        .skip(1)
        .fold(blocks[0].clone(), |acc, b| linalg::direct_sum(&acc, b))
}
