//! Extreme Carathéodory interpolation along weighted shifts.
//!
//! Coefficients here follow the disc automorphism
//!
//! ```text
//! f(z) = (c₀ − e^{iθ}z) / (1 − c₀* e^{iθ}z) = Σ c_j z^j,
//! ```
//!
//! whereas candidate automorphisms in [`crate::freemap`] use
//! `𝔪_b(e^{iθ}z) = (b + e^{iθ}z)/(1 + b* e^{iθ}z)`. The two agree with
//! `c₀ = b` and `θ ↦ θ + π`; [`seed_from_mobius`] is the only place that
//! conversion happens.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c64, identity, op_norm, zeros, CMatrix};
use crate::pencil::MatrixTuple;

/// Tolerance on `1 − |c₀|² − |c₁|` for the 2×2 norm-one test.
pub const TWO_BY_TWO_TOL: f64 = 1e-10;

/// Product norm below which a tuple counts as nilpotent.
pub const NILPOTENT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum TwoByTwo {
    /// `‖X‖ = 1`; `kernel` spans the kernel of `I − XX*`.
    NormOne { kernel: [Complex64; 2] },
    StrictContraction,
    NormExceedsOne,
}

/// Norm class of `[[c₀, c₁], [0, c₀]]`, read off from `1 − |c₀|² − |c₁|`.
pub fn two_by_two_classify(c0: Complex64, c1: Complex64) -> TwoByTwo {
    let det = 1.0 - c0.norm_sqr() - c1.norm();
    if det.abs() <= TWO_BY_TWO_TOL && c0.norm() <= 1.0 + TWO_BY_TWO_TOL {
        let defect = 1.0 - c0.norm_sqr();
        let kernel = if defect <= TWO_BY_TWO_TOL {
            // |c₀| = 1 and c₁ = 0: I − XX* vanishes.
            [c64(1.0, 0.0), c64(0.0, 0.0)]
        } else {
            // c₁ = e^{iθ}(|c₀|² − 1) fixes e^{-iθ} = −c₁*/|c₁|.
            let e_minus = -c1.conj() / c1.norm();
            let v = [c64(1.0, 0.0), -e_minus * c0];
            let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
            [v[0] / n, v[1] / n]
        };
        TwoByTwo::NormOne { kernel }
    } else if det > 0.0 {
        TwoByTwo::StrictContraction
    } else {
        TwoByTwo::NormExceedsOne
    }
}

/// Center and phase of the disc automorphism `f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MobiusSeed {
    c0: Complex64,
    theta: f64,
}

impl MobiusSeed {
    pub fn new(c0: Complex64, theta: f64) -> Result<Self> {
        if !(c0.norm() < 1.0 - 1e-12) || !theta.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "seed needs |c0| < 1 and finite theta, got |c0| = {}, theta = {theta}",
                c0.norm()
            )));
        }
        Ok(MobiusSeed { c0, theta })
    }

    pub fn c0(&self) -> Complex64 {
        self.c0
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `f(z)` evaluated directly.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let e = Complex64::from_polar(1.0, self.theta);
        (self.c0 - e * z) / (1.0 - self.c0.conj() * e * z)
    }
}

/// Seed reproducing `𝔪_b(e^{iθ}z)`.
pub fn seed_from_mobius(b: Complex64, theta: f64) -> Result<MobiusSeed> {
    MobiusSeed::new(b, theta + std::f64::consts::PI)
}

/// `c₀, …, c_N` with `c_j = e^{iθ}(e^{iθ}c₀*)^{j−1}(|c₀|² − 1)`.
pub fn mobius_coeffs(seed: &MobiusSeed, n: usize) -> Vec<Complex64> {
    let e = Complex64::from_polar(1.0, seed.theta);
    let ratio = e * seed.c0.conj();
    let mut out = Vec::with_capacity(n + 1);
    out.push(seed.c0);
    let mut c = e * (seed.c0.norm_sqr() - 1.0);
    for _ in 1..=n {
        out.push(c);
        c *= ratio;
    }
    out
}

/// Weighted shift of order `n`: `(n+1)×(n+1)` with `S_{j,j+1} = λ_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedShift {
    weights: Vec<Complex64>,
}

impl WeightedShift {
    /// `weights[0]` must be 1 and no weight may vanish.
    pub fn new(weights: Vec<Complex64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidArgument("a weighted shift needs order at least 1".into()));
        }
        if (weights[0] - c64(1.0, 0.0)).norm() > 1e-12 {
            return Err(Error::InvalidWeight {
                index: 1,
                reason: format!("λ₁ must be 1, got {}", weights[0]),
            });
        }
        for (i, w) in weights.iter().enumerate() {
            if !w.re.is_finite() || !w.im.is_finite() {
                return Err(Error::InvalidWeight {
                    index: i + 1,
                    reason: "not finite".into(),
                });
            }
            if w.norm() == 0.0 {
                return Err(Error::InvalidWeight {
                    index: i + 1,
                    reason: "zero weight".into(),
                });
            }
        }
        Ok(WeightedShift { weights })
    }

    /// The unweighted shift of order `n`.
    pub fn unweighted(n: usize) -> Self {
        WeightedShift {
            weights: vec![c64(1.0, 0.0); n.max(1)],
        }
    }

    pub fn order(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    pub fn matrix(&self) -> CMatrix {
        let n = self.order();
        let mut s = zeros(n + 1, n + 1);
        for (j, &w) in self.weights.iter().enumerate() {
            s[(j, j + 1)] = w;
        }
        s
    }
}

/// `Σ_j c_j S^j` for arbitrary coefficients `c_0, …, c_n`.
pub fn toeplitz_from_coeffs(coeffs: &[Complex64], shift: &WeightedShift) -> Result<CMatrix> {
    let n = shift.order();
    if coeffs.len() != n + 1 {
        return Err(Error::Shape(format!(
            "need {} coefficients for order {n}, got {}",
            n + 1,
            coeffs.len()
        )));
    }
    let s = shift.matrix();
    let mut power = identity(n + 1);
    let mut t = zeros(n + 1, n + 1);
    for &c in coeffs {
        t += &power * c;
        power = &power * &s;
    }
    Ok(t)
}

/// `T = f(S) = Σ_{j≤n} c_j S^j`, a norm-one contraction whenever every
/// weight lies in the closed unit disc.
pub fn extreme_toeplitz(seed: &MobiusSeed, shift: &WeightedShift) -> Result<CMatrix> {
    for (i, w) in shift.weights().iter().enumerate() {
        if w.norm() > 1.0 + 1e-12 {
            return Err(Error::InvalidWeight {
                index: i + 1,
                reason: format!("|λ| = {} exceeds 1", w.norm()),
            });
        }
    }
    toeplitz_from_coeffs(&mobius_coeffs(seed, shift.order()), shift)
}

/// `‖T + μP‖ − 1` where `P` is the corner matrix unit `E_{1,n+1}`.
///
/// Positive for `μ ≠ 0` once the order is at least 2. When every weight is
/// unimodular the excess grows linearly in `|μ|`; otherwise it can be second
/// order, bounded below by [`rigidity_lower_bound`].
pub fn rigidity_check(t: &CMatrix, mu: Complex64) -> f64 {
    let mut m = t.clone();
    let last = m.ncols() - 1;
    m[(0, last)] += mu;
    op_norm(&m) - 1.0
}

/// `√(1 + |μ|²/(1 + |c₀|²)) − 1`, a lower bound for the rigidity excess of
/// `extreme_toeplitz(seed, S)` at any order ≥ 2.
///
/// Take `u = (v, 0, …, 0)` with `v` the kernel vector of the leading 2×2
/// block. Then `‖T*u‖ = ‖u‖`, the last entry of `T*u` vanishes, and
/// `(T + μP)*u` gains `μ* u₁` in that slot.
pub fn rigidity_lower_bound(seed: &MobiusSeed, mu: Complex64) -> f64 {
    (1.0 + mu.norm_sqr() / (1.0 + seed.c0.norm_sqr())).sqrt() - 1.0
}

/// Letters are 1-based coordinate indices; `x₁x₂` is `vec![1, 2]` and
/// evaluates to `T₁T₂`.
pub type Word = Vec<usize>;

/// Truncated free power series with sparse coefficients.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FreeSeries {
    g: usize,
    coeffs: BTreeMap<Word, Complex64>,
}

impl FreeSeries {
    pub fn new(g: usize) -> Self {
        FreeSeries {
            g,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn from_terms(g: usize, terms: impl IntoIterator<Item = (Word, Complex64)>) -> Result<Self> {
        let mut s = FreeSeries::new(g);
        for (w, c) in terms {
            s.add_term(w, c)?;
        }
        Ok(s)
    }

    pub fn add_term(&mut self, word: Word, coeff: Complex64) -> Result<()> {
        if let Some(&bad) = word.iter().find(|&&l| l == 0 || l > self.g) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                max: self.g,
            });
        }
        *self.coeffs.entry(word).or_insert(c64(0.0, 0.0)) += coeff;
        Ok(())
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn max_degree(&self) -> usize {
        self.coeffs.keys().map(Vec::len).max().unwrap_or(0)
    }

    pub fn coeff(&self, word: &[usize]) -> Complex64 {
        self.coeffs.get(word).copied().unwrap_or(c64(0.0, 0.0))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &Complex64)> {
        self.coeffs.iter()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// The one-variable series of `𝔪_b(e^{iθ}x_k)` through degree `n`.
    pub fn mobius(g: usize, k: usize, b: Complex64, theta: f64, n: usize) -> Result<Self> {
        let seed = seed_from_mobius(b, theta)?;
        let coeffs = mobius_coeffs(&seed, n);
        FreeSeries::from_terms(g, coeffs.into_iter().enumerate().map(|(j, c)| (vec![k; j], c)))
    }
}

/// Largest norm among all length-`len` products of the coordinates.
pub fn max_word_norm(t: &MatrixTuple, len: usize) -> f64 {
    fn walk(t: &MatrixTuple, prefix: &CMatrix, remaining: usize, best: &mut f64) {
        if prefix.norm() <= f64::EPSILON * 1e-6 {
            return;
        }
        if remaining == 0 {
            *best = best.max(prefix.norm());
            return;
        }
        for m in t.matrices() {
            walk(t, &(prefix * m), remaining - 1, best);
        }
    }
    let mut best = 0.0;
    walk(t, &identity(t.level()), len, &mut best);
    best
}

/// `T^α` for a word `α`.
pub fn word_power(t: &MatrixTuple, word: &[usize]) -> CMatrix {
    word.iter()
        .fold(identity(t.level()), |acc, &l| acc * t.coord(l))
}

/// `Σ_α a_α T^α`. With `strict` set, every word of length `N+1`
/// (`N` the series degree) must vanish on `T`.
pub fn eval_free_series(series: &FreeSeries, t: &MatrixTuple, strict: bool) -> Result<CMatrix> {
    if t.g() != series.g() {
        return Err(Error::Shape(format!(
            "series in {} variables, tuple has {}",
            series.g(),
            t.g()
        )));
    }
    if strict {
        let residual = max_word_norm(t, series.max_degree() + 1);
        if residual > NILPOTENT_TOL {
            return Err(Error::NotNilpotent { residual });
        }
    }
    // Words share prefixes in lexicographic order, so cache the last one.
    let n = t.level();
    let mut out = zeros(n, n);
    let mut stack: Vec<CMatrix> = vec![identity(n)];
    let mut last: &[usize] = &[];
    for (word, &c) in series.terms() {
        let common = word.iter().zip(last).take_while(|(a, b)| a == b).count();
        stack.truncate(common + 1);
        for &l in &word[common..] {
            let next = stack.last().expect("stack holds the identity") * t.coord(l);
            stack.push(next);
        }
        out += stack.last().expect("stack holds the identity") * c;
        last = word;
    }
    Ok(out)
}

/// Tuple of `(N+1)×(N+1)` superdiagonal matrices with
/// `(T_ℓ)_{u,u+1} = λ_{ℓ,u}`; `weights[ℓ-1][u-1]` holds `λ_{ℓ,u}` and the
/// designated coordinate `k` must have `λ_{k,1} = 1`.
///
/// For a word `α = x_{j₁}⋯x_{j_N}` the corner entry of `T^α` is
/// `λ_{j₁,1}λ_{j₂,2}⋯λ_{j_N,N}`.
pub fn nilpotent_shift_family(g: usize, n: usize, weights: &[Vec<Complex64>], k: usize) -> Result<MatrixTuple> {
    if weights.len() != g || weights.iter().any(|row| row.len() != n) {
        return Err(Error::Shape(format!("weights must be {g}×{n}")));
    }
    if k == 0 || k > g {
        return Err(Error::IndexOutOfRange { index: k, max: g });
    }
    if (weights[k - 1][0] - c64(1.0, 0.0)).norm() > 1e-12 {
        return Err(Error::InvalidWeight {
            index: 1,
            reason: format!("λ_(k,1) must be 1 for the designated coordinate {k}"),
        });
    }
    let mats = weights
        .iter()
        .enumerate()
        .map(|(l, row)| {
            let mut m = zeros(n + 1, n + 1);
            for (u, &w) in row.iter().enumerate() {
                if !w.re.is_finite() || !w.im.is_finite() {
                    return Err(Error::InvalidWeight {
                        index: u + 1,
                        reason: format!("coordinate {} weight not finite", l + 1),
                    });
                }
                m[(u, u + 1)] = w;
            }
            Ok(m)
        })
        .collect::<Result<Vec<_>>>()?;
    MatrixTuple::from_vec(mats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{jordan_shift, matrix_unit};
    use crate::sampling::random_phase;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn r(x: f64) -> Complex64 {
        c64(x, 0.0)
    }

    /// Taylor coefficients of `(c₀ − e z)/(1 − c₀* e z)` by long division.
    fn division_oracle(c0: Complex64, theta: f64, n: usize) -> Vec<Complex64> {
        let e = Complex64::from_polar(1.0, theta);
        let num = [c0, -e];
        let q = c0.conj() * e;
        let mut out: Vec<Complex64> = Vec::new();
        for j in 0..=n {
            let mut a = if j < 2 { num[j] } else { r(0.0) };
            if j > 0 {
                a += q * out[j - 1];
            }
            out.push(a);
        }
        out
    }

    fn random_seed(rng: &mut ChaCha8Rng) -> MobiusSeed {
        let rad: f64 = rng.random_range(0.0..0.95);
        MobiusSeed::new(random_phase(rng) * rad, rng.random_range(0.0..2.0 * PI)).unwrap()
    }

    fn random_shift(rng: &mut ChaCha8Rng, n: usize, unimodular: bool) -> WeightedShift {
        let mut w = vec![r(1.0)];
        for _ in 1..n {
            let m: f64 = if unimodular { 1.0 } else { rng.random_range(0.2..=1.0) };
            w.push(random_phase(rng) * m);
        }
        WeightedShift::new(w).unwrap()
    }

    #[test]
    fn two_by_two_cases() {
        assert_eq!(
            two_by_two_classify(r(0.0), r(1.0)),
            TwoByTwo::NormOne { kernel: [r(1.0), r(0.0)] }
        );
        assert!(matches!(two_by_two_classify(r(0.5), r(-0.75)), TwoByTwo::NormOne { .. }));
        assert_eq!(two_by_two_classify(r(0.5), r(0.5)), TwoByTwo::StrictContraction);
        assert_eq!(two_by_two_classify(r(0.5), r(0.9)), TwoByTwo::NormExceedsOne);
    }

    #[test]
    fn two_by_two_agrees_with_norm_and_kernel() {
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        for _ in 0..50 {
            let c0 = random_phase(&mut rng) * rng.random_range(0.0..0.99);
            let theta: f64 = rng.random_range(0.0..2.0 * PI);
            let c1 = Complex64::from_polar(1.0, theta) * (c0.norm_sqr() - 1.0);
            let x = CMatrix::from_row_slice(2, 2, &[c0, c1, r(0.0), c0]);
            assert!((op_norm(&x) - 1.0).abs() < 1e-12);
            let TwoByTwo::NormOne { kernel } = two_by_two_classify(c0, c1) else {
                panic!("expected norm one");
            };
            let v = crate::linalg::CVector::from_row_slice(&kernel);
            let defect = identity(2) - &x * x.adjoint();
            assert!((defect * v).norm() < 1e-12);
        }
    }

    #[test]
    fn mobius_coeffs_cases() {
        let s = MobiusSeed::new(r(0.0), 0.0).unwrap();
        assert_eq!(mobius_coeffs(&s, 3), vec![r(0.0), r(-1.0), r(0.0), r(0.0)]);
        let s = MobiusSeed::new(r(0.5), 0.0).unwrap();
        let c = mobius_coeffs(&s, 2);
        for (a, b) in c.iter().zip([0.5, -0.75, -0.375]) {
            assert!((a - r(b)).norm() < 1e-15);
        }
    }

    #[test]
    fn mobius_coeffs_match_taylor_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..100 {
            let s = random_seed(&mut rng);
            let a = mobius_coeffs(&s, 8);
            let b = division_oracle(s.c0(), s.theta(), 8);
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).norm() < 1e-12);
            }
            // partial sums converge to f at a small point
            let z = c64(0.1, -0.05);
            let partial: Complex64 = mobius_coeffs(&s, 30)
                .iter()
                .enumerate()
                .map(|(j, c)| c * z.powu(j as u32))
                .sum();
            assert!((partial - s.eval(z)).norm() < 1e-12);
        }
    }

    #[test]
    fn seed_rejects_boundary_center() {
        assert!(MobiusSeed::new(r(1.0), 0.0).is_err());
        assert!(MobiusSeed::new(r(0.5), f64::NAN).is_err());
    }

    #[test]
    fn adapter_reproduces_candidate_convention() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for _ in 0..20 {
            let b = random_phase(&mut rng) * rng.random_range(0.0..0.9);
            let theta: f64 = rng.random_range(0.0..2.0 * PI);
            let seed = seed_from_mobius(b, theta).unwrap();
            let z = random_phase(&mut rng) * 0.7;
            let e = Complex64::from_polar(1.0, theta);
            let m = (b + e * z) / (1.0 + b.conj() * e * z);
            assert!((seed.eval(z) - m).norm() < 1e-13);
        }
    }

    #[test]
    fn weighted_shift_validation() {
        assert!(WeightedShift::new(vec![r(0.5)]).is_err());
        assert!(matches!(
            WeightedShift::new(vec![r(1.0), r(0.0)]),
            Err(Error::InvalidWeight { index: 2, .. })
        ));
        let s = WeightedShift::new(vec![r(1.0), c64(0.0, 0.5)]).unwrap().matrix();
        assert_eq!(s[(0, 1)], r(1.0));
        assert_eq!(s[(1, 2)], c64(0.0, 0.5));
        assert_eq!(s.iter().filter(|z| z.norm() > 0.0).count(), 2);
        assert_eq!(WeightedShift::unweighted(2).matrix(), jordan_shift(3));
    }

    #[test]
    fn extreme_toeplitz_cases() {
        let seed = MobiusSeed::new(r(0.5), 0.0).unwrap();
        let t = extreme_toeplitz(&seed, &WeightedShift::unweighted(2)).unwrap();
        assert!((t[(0, 0)] - r(0.5)).norm() < 1e-15);
        assert!((t[(0, 1)] - r(-0.75)).norm() < 1e-15);
        assert!((t[(0, 2)] - r(-0.375)).norm() < 1e-15);
        assert!((t[(1, 2)] - r(-0.75)).norm() < 1e-15);
        assert!((op_norm(&t) - 1.0).abs() < 1e-9);

        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let shift = random_shift(&mut rng, 4, false);
        let seed = MobiusSeed::new(r(0.0), 1.3).unwrap();
        let t = extreme_toeplitz(&seed, &shift).unwrap();
        let expect = shift.matrix() * (-Complex64::from_polar(1.0, 1.3));
        assert!((t - expect).norm() < 1e-15);

        let bad = WeightedShift::new(vec![r(1.0), r(1.5)]).unwrap();
        assert!(extreme_toeplitz(&seed, &bad).is_err());
    }

    #[test]
    fn extreme_toeplitz_has_norm_one_and_is_rigid() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        for trial in 0..200 {
            let n = rng.random_range(2..=6);
            let unimodular = trial % 2 == 0;
            let seed = random_seed(&mut rng);
            let shift = random_shift(&mut rng, n, unimodular);
            let t = extreme_toeplitz(&seed, &shift).unwrap();
            assert!((op_norm(&t) - 1.0).abs() < 1e-9);
            assert!(rigidity_check(&t, r(0.0)).abs() < 1e-9);
            for mag in [1e-3, 1e-2, 1e-1] {
                let mu = random_phase(&mut rng) * mag;
                let ex = rigidity_check(&t, mu);
                assert!(ex >= rigidity_lower_bound(&seed, mu) - 1e-12);
                if unimodular || mag >= 1e-2 {
                    assert!(ex > 1e-6, "n={n} |μ|={mag}");
                }
            }
            // c₀ and c₁ are data; uniqueness concerns the later coefficients
            let mut c = mobius_coeffs(&seed, n);
            let j = rng.random_range(2..=n);
            c[j] += random_phase(&mut rng) * 1e-2;
            let excess = op_norm(&toeplitz_from_coeffs(&c, &shift).unwrap()) - 1.0;
            assert!(excess > if unimodular { 1e-6 } else { 1e-10 }, "n={n} j={j}");
        }
    }

    #[test]
    fn shrinking_c1_leaves_a_contraction() {
        let seed = MobiusSeed::new(r(0.4), 0.0).unwrap();
        let shift = WeightedShift::unweighted(3);
        let mut c = mobius_coeffs(&seed, 3);
        c[1] *= 0.99;
        let t = toeplitz_from_coeffs(&c, &shift).unwrap();
        assert!(op_norm(&t) < 1.0);
    }

    #[test]
    fn order_one_is_not_rigid() {
        // the corner entry is c₁ itself, so shrinking it stays contractive
        let seed = MobiusSeed::new(r(0.3), 0.0).unwrap();
        let t = extreme_toeplitz(&seed, &WeightedShift::unweighted(1)).unwrap();
        let c1 = t[(0, 1)];
        assert!(rigidity_check(&t, -c1 * 0.01) < 0.0);
    }

    #[test]
    fn rigidity_excess_grows_along_a_ray() {
        let seed = MobiusSeed::new(r(0.5), 0.0).unwrap();
        let t = extreme_toeplitz(&seed, &WeightedShift::unweighted(2)).unwrap();
        assert!(rigidity_check(&t, r(0.1)) > 0.0);
        let dir = c64(0.6, 0.8);
        let ex: Vec<f64> = (1..=20).map(|i| rigidity_check(&t, dir * (0.01 * i as f64))).collect();
        assert!(ex.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn eval_free_series_cases() {
        let s = FreeSeries::from_terms(1, [(vec![1], r(1.0))]).unwrap();
        let t = MatrixTuple::from_vec(vec![jordan_shift(2)]).unwrap();
        assert_eq!(eval_free_series(&s, &t, true).unwrap(), jordan_shift(2));

        let s = FreeSeries::from_terms(2, [(vec![1, 2], r(1.0))]).unwrap();
        let t = MatrixTuple::from_vec(vec![matrix_unit(3, 0, 1), matrix_unit(3, 1, 2)]).unwrap();
        assert_eq!(eval_free_series(&s, &t, true).unwrap(), matrix_unit(3, 0, 2));

        let s = FreeSeries::from_terms(1, [(vec![1], r(1.0))]).unwrap();
        let t = MatrixTuple::from_vec(vec![identity(2)]).unwrap();
        assert!(matches!(eval_free_series(&s, &t, true), Err(Error::NotNilpotent { .. })));
        assert!(eval_free_series(&s, &t, false).is_ok());
        assert!(FreeSeries::from_terms(1, [(vec![2], r(1.0))]).is_err());
    }

    #[test]
    fn eval_free_series_matches_naive_sum_exhaustively() {
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        for g in 1..=2usize {
            for n in 1..=3usize {
                let mut words: Vec<Word> = vec![vec![]];
                for len in 1..=n {
                    let mut next = Vec::new();
                    for w in words.iter().filter(|w| w.len() == len - 1) {
                        for l in 1..=g {
                            let mut v = w.clone();
                            v.push(l);
                            next.push(v);
                        }
                    }
                    words.extend(next);
                }
                let terms: Vec<(Word, Complex64)> =
                    words.iter().map(|w| (w.clone(), crate::sampling::gaussian(&mut rng))).collect();
                let series = FreeSeries::from_terms(g, terms.clone()).unwrap();
                let weights: Vec<Vec<Complex64>> = (0..g)
                    .map(|l| (0..n).map(|u| if l == 0 && u == 0 { r(1.0) } else { crate::sampling::gaussian(&mut rng) }).collect())
                    .collect();
                let t = nilpotent_shift_family(g, n, &weights, 1).unwrap();
                let fast = eval_free_series(&series, &t, true).unwrap();
                let mut slow = zeros(n + 1, n + 1);
                for (w, c) in &terms {
                    let mut m = identity(n + 1);
                    for &l in w {
                        m = m * t.coord(l);
                    }
                    slow += m * *c;
                }
                assert!((fast - slow).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn nilpotent_shift_family_cases() {
        let t = nilpotent_shift_family(1, 2, &[vec![r(1.0), r(1.0)]], 1).unwrap();
        assert_eq!(t.coord(1), &jordan_shift(3));
        let l = [vec![r(1.0), r(2.0)], vec![r(3.0), r(5.0)]];
        let t = nilpotent_shift_family(2, 2, &l, 1).unwrap();
        assert_eq!(word_power(&t, &[1, 2])[(0, 2)], r(5.0));
        assert!(nilpotent_shift_family(2, 2, &l, 2).is_err());
        assert!(nilpotent_shift_family(2, 3, &l, 1).is_err());
    }

    #[test]
    fn corner_entries_separate_length_two_words() {
        let mut rng = ChaCha8Rng::seed_from_u64(36);
        let weights: Vec<Vec<Complex64>> = (0..2)
            .map(|l| (0..2).map(|u| if l == 0 && u == 0 { r(1.0) } else { crate::sampling::gaussian(&mut rng) }).collect())
            .collect();
        let t = nilpotent_shift_family(2, 2, &weights, 1).unwrap();
        let words = [[1, 1], [1, 2], [2, 1], [2, 2]];
        let corners: Vec<Complex64> = words.iter().map(|w| word_power(&t, w)[(0, 2)]).collect();
        for (i, w) in words.iter().enumerate() {
            let expect = weights[w[0] - 1][0] * weights[w[1] - 1][1];
            assert!((corners[i] - expect).norm() < 1e-14);
            for j in 0..i {
                assert!((corners[i] - corners[j]).norm() > 1e-8);
            }
        }
    }
}
