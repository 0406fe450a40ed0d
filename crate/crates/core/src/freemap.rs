//! Candidate free automorphisms: a permutation, coordinatewise Möbius maps
//! and optional higher-order terms,
//!
//! ```text
//! φ_j(x) = 𝔪_{b_j}(e^{iθ_j} x_{π(j)}) + 𝔥_j(x),   𝔪_b(z) = (b + z)/(1 + b* z).
//! ```
//!
//! Permutations are stored 1-based: `perm[j-1] = π(j)`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::caratheodory::{eval_free_series, nilpotent_shift_family, FreeSeries};
use crate::error::{Error, Result};
use crate::linalg::{c64, identity, jordan_shift, zeros, CMatrix, DEFAULT_TOL};
use crate::pencil::{Membership, MatrixTuple, Pencil, StructuredKind};
use crate::sampling::random_interior;

/// Largest condition number accepted for `I + b* e^{iθ} X`.
pub const MAX_CONDITION: f64 = 1e12;

/// Threshold on `|b_j|` for membership in the fixed support.
pub const SUPPORT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateAutomorphism {
    perm: Vec<usize>,
    theta: Vec<f64>,
    b: Vec<Complex64>,
    higher: Option<Vec<FreeSeries>>,
}

impl CandidateAutomorphism {
    pub fn new(perm: Vec<usize>, theta: Vec<f64>, b: Vec<Complex64>) -> Result<Self> {
        let g = perm.len();
        if theta.len() != g || b.len() != g {
            return Err(Error::Shape(format!(
                "perm has {g} entries, theta {}, b {}",
                theta.len(),
                b.len()
            )));
        }
        let mut seen = vec![false; g];
        for &k in &perm {
            if k == 0 || k > g {
                return Err(Error::IndexOutOfRange { index: k, max: g });
            }
            if std::mem::replace(&mut seen[k - 1], true) {
                return Err(Error::InvalidArgument(format!("perm repeats {k}")));
            }
        }
        for (j, z) in b.iter().enumerate() {
            if !(z.norm() < 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "center b_{} has modulus {}, must be < 1",
                    j + 1,
                    z.norm()
                )));
            }
        }
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidArgument("phases must be finite".into()));
        }
        Ok(CandidateAutomorphism {
            perm,
            theta,
            b,
            higher: None,
        })
    }

    pub fn identity(g: usize) -> Self {
        Self::new((1..=g).collect(), vec![0.0; g], vec![c64(0.0, 0.0); g]).expect("identity is valid")
    }

    /// The trivial automorphism `x ↦ e^{iθ}·x`.
    pub fn trivial(theta: Vec<f64>) -> Result<Self> {
        let g = theta.len();
        Self::new((1..=g).collect(), theta, vec![c64(0.0, 0.0); g])
    }

    /// Attach higher-order terms. Coordinate `j` may only use words of length
    /// at least 2 that are not pure powers of `x_{π(j)}`.
    pub fn with_higher(mut self, higher: Vec<FreeSeries>) -> Result<Self> {
        let g = self.g();
        if higher.len() != g {
            return Err(Error::Shape(format!("{} higher series for g = {g}", higher.len())));
        }
        for (j, s) in higher.iter().enumerate() {
            if s.g() != g {
                return Err(Error::Shape(format!("higher series {} has g = {}", j + 1, s.g())));
            }
            let k = self.perm[j];
            for (w, _) in s.terms() {
                if w.len() < 2 {
                    return Err(Error::InvalidArgument(format!(
                        "higher series {} has a word of length {}",
                        j + 1,
                        w.len()
                    )));
                }
                if w.iter().all(|&l| l == k) {
                    return Err(Error::InvalidArgument(format!(
                        "higher series {} contains a pure power of x_{k}",
                        j + 1
                    )));
                }
            }
        }
        self.higher = if higher.iter().all(FreeSeries::is_empty) {
            None
        } else {
            Some(higher)
        };
        Ok(self)
    }

    pub fn g(&self) -> usize {
        self.perm.len()
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn b(&self) -> &[Complex64] {
        &self.b
    }

    pub fn higher(&self) -> Option<&[FreeSeries]> {
        self.higher.as_deref()
    }

    pub fn is_trivial(&self) -> bool {
        self.higher.is_none()
            && self.b.iter().all(|z| z.norm() <= SUPPORT_TOL)
            && self.perm.iter().enumerate().all(|(j, &k)| k == j + 1)
    }

    /// Inverse within the Möbius-permutation class.
    pub fn inverse(&self) -> Result<Self> {
        self.require_symbolic("inverse")?;
        let g = self.g();
        let mut perm = vec![0; g];
        let mut theta = vec![0.0; g];
        let mut b = vec![c64(0.0, 0.0); g];
        for j in 0..g {
            // z = e^{-iθ}𝔪_{-b}(w) = 𝔪_{-e^{-iθ}b}(e^{-iθ}w)
            let k = self.perm[j] - 1;
            perm[k] = j + 1;
            theta[k] = -self.theta[j];
            b[k] = -Complex64::from_polar(1.0, -self.theta[j]) * self.b[j];
        }
        Self::new(perm, theta, b)
    }

    fn require_symbolic(&self, what: &str) -> Result<()> {
        if self.higher.is_some() {
            return Err(Error::InvalidArgument(format!(
                "{what} is only available without higher-order terms"
            )));
        }
        Ok(())
    }

    /// Evaluate at a scalar point (level one) by direct complex arithmetic.
    pub fn scalar_eval(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        if z.len() != self.g() {
            return Err(Error::Shape(format!("point has {} coordinates, g = {}", z.len(), self.g())));
        }
        let mut out: Vec<Complex64> = (0..self.g())
            .map(|j| mobius_scalar(self.b[j], self.theta[j], z[self.perm[j] - 1]))
            .collect();
        if let Some(h) = &self.higher {
            for (j, s) in h.iter().enumerate() {
                for (w, c) in s.terms() {
                    out[j] += c * w.iter().map(|&l| z[l - 1]).product::<Complex64>();
                }
            }
        }
        Ok(out)
    }
}

/// `𝔪_b(e^{iθ}z)` for scalars.
pub fn mobius_scalar(b: Complex64, theta: f64, z: Complex64) -> Complex64 {
    let w = Complex64::from_polar(1.0, theta) * z;
    (b + w) / (1.0 + b.conj() * w)
}

/// `𝔪̂_c(x) = (c + x)/(1 + cx)` for real `c`.
pub fn mobius_hat(c: f64, x: f64) -> f64 {
    (c + x) / (1.0 + c * x)
}

/// `(bI + e^{iθ}X)(I + b* e^{iθ}X)^{-1}`.
pub fn mobius_matrix(b: Complex64, theta: f64, x: &CMatrix) -> Result<CMatrix> {
    if x.nrows() != x.ncols() {
        return Err(Error::Shape(format!("X is {}x{}", x.nrows(), x.ncols())));
    }
    let n = x.nrows();
    let ex = x * Complex64::from_polar(1.0, theta);
    let resolvent = identity(n) + &ex * b.conj();
    let sv = resolvent.singular_values();
    let (smax, smin) = sv.iter().fold((0.0_f64, f64::INFINITY), |(hi, lo), &s| (hi.max(s), lo.min(s)));
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if condition > MAX_CONDITION {
        return Err(Error::NearSingular { condition });
    }
    let inv = resolvent
        .try_inverse()
        .ok_or(Error::NearSingular { condition })?;
    Ok((identity(n) * b + ex) * inv)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum EvalMode {
    /// Higher-order terms require a nilpotent input.
    #[default]
    Strict,
    /// Higher-order terms are summed as given on any input.
    Truncated,
}

/// `φ(X)` coordinatewise.
pub fn eval(cand: &CandidateAutomorphism, x: &MatrixTuple, mode: EvalMode) -> Result<MatrixTuple> {
    if x.g() != cand.g() {
        return Err(Error::Shape(format!("tuple has g = {}, candidate g = {}", x.g(), cand.g())));
    }
    let mut out = Vec::with_capacity(cand.g());
    for j in 0..cand.g() {
        let mut m = mobius_matrix(cand.b[j], cand.theta[j], x.coord(cand.perm[j]))?;
        if let Some(h) = &cand.higher {
            if !h[j].is_empty() {
                m += eval_free_series(&h[j], x, mode == EvalMode::Strict)?;
            }
        }
        out.push(m);
    }
    MatrixTuple::from_vec(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AffineLinearPart {
    pub b: Vec<Complex64>,
    pub l: CMatrix,
    /// True when `ℒ` has exactly one nonzero entry in each row and column.
    pub is_scaled_permutation: bool,
}

/// Read `b = f(0)` and `ℒ` off level-2 probes: column `k` of `ℒ` is the
/// `(1,2)` entry of `f(δ_k S) − b` with `S` the 2×2 shift.
pub fn extract_affine_linear<F>(f: F, g: usize) -> Result<AffineLinearPart>
where
    F: Fn(&MatrixTuple) -> Result<MatrixTuple>,
{
    let base = f(&MatrixTuple::zeros(g, 2))?;
    if base.g() != g || base.level() != 2 {
        return Err(Error::Shape("black box changed g or level".into()));
    }
    let b: Vec<Complex64> = base.matrices().iter().map(|m| m[(0, 0)]).collect();
    let mut l = zeros(g, g);
    for k in 1..=g {
        let img = f(&MatrixTuple::single(g, k, jordan_shift(2)))?;
        for j in 0..g {
            l[(j, k - 1)] = img.matrices()[j][(0, 1)] - base.matrices()[j][(0, 1)];
        }
    }
    let is_scaled_permutation = scaled_permutation(&l);
    Ok(AffineLinearPart {
        b,
        l,
        is_scaled_permutation,
    })
}

fn scaled_permutation(l: &CMatrix) -> bool {
    let thresh = 1e-9 * (1.0 + crate::linalg::max_abs(l));
    let g = l.nrows();
    let nz = |j: usize, k: usize| l[(j, k)].norm() > thresh;
    (0..g).all(|j| (0..g).filter(|&k| nz(j, k)).count() == 1)
        && (0..g).all(|k| (0..g).filter(|&j| nz(j, k)).count() == 1)
}

/// `𝓕 = {j : |b_j| > tol}`, 1-based.
pub fn fixed_support(cand: &CandidateAutomorphism, tol: f64) -> Vec<usize> {
    cand.b
        .iter()
        .enumerate()
        .filter(|(_, z)| z.norm() > tol)
        .map(|(j, _)| j + 1)
        .collect()
}

/// `ρ∘φ∘τ` with trivial scalings chosen so every center is `|b_j|` and
/// every phase is 0; the Möbius part becomes `𝔪̂_{|b_j|}(x_{π(j)})`.
pub fn normalize(cand: &CandidateAutomorphism) -> CandidateAutomorphism {
    let g = cand.g();
    let gamma: Vec<Complex64> = cand
        .b
        .iter()
        .map(|z| if z.norm() > 0.0 { z.conj() / z.norm() } else { c64(1.0, 0.0) })
        .collect();
    // α_k = e^{-iθ_j} γ_j* with k = π(j)
    let mut alpha = vec![c64(1.0, 0.0); g];
    for j in 0..g {
        alpha[cand.perm[j] - 1] = Complex64::from_polar(1.0, -cand.theta[j]) * gamma[j].conj();
    }
    let higher = cand.higher.as_ref().map(|hs| {
        hs.iter()
            .enumerate()
            .map(|(j, s)| {
                FreeSeries::from_terms(
                    g,
                    s.terms().map(|(w, &c)| {
                        let scale: Complex64 = w.iter().map(|&l| alpha[l - 1]).product();
                        (w.clone(), gamma[j] * c * scale)
                    }),
                )
                .expect("words already validated")
            })
            .collect::<Vec<_>>()
    });
    let mut out = CandidateAutomorphism {
        perm: cand.perm.clone(),
        theta: vec![0.0; g],
        b: cand.b.iter().map(|z| c64(z.norm(), 0.0)).collect(),
        higher: None,
    };
    if let Some(h) = higher {
        out = out.with_higher(h).expect("normalization preserves word sets");
    }
    out
}

/// `outer ∘ inner` within the Möbius-permutation class.
///
/// Coordinate `j` of the result is `𝔪_{b̃_j}(e^{iθ̃_j} 𝔪_{b_k}(e^{iθ_k} x_{π(k)}))`
/// with `k = π̃(j)`, re-expressed as `𝔪_c(e^{iψ} x_{τ(j)})`, `τ = π∘π̃`.
pub fn compose(outer: &CandidateAutomorphism, inner: &CandidateAutomorphism) -> Result<CandidateAutomorphism> {
    if outer.g() != inner.g() {
        return Err(Error::Shape(format!("cannot compose g = {} with g = {}", outer.g(), inner.g())));
    }
    outer.require_symbolic("symbolic composition")?;
    inner.require_symbolic("symbolic composition")?;
    let g = outer.g();
    let mut perm = Vec::with_capacity(g);
    let mut theta = Vec::with_capacity(g);
    let mut b = Vec::with_capacity(g);
    for j in 0..g {
        let k = outer.perm[j] - 1;
        let (bo, to) = (outer.b[j], outer.theta[j]);
        let (bi, ti) = (inner.b[k], inner.theta[k]);
        let eo = Complex64::from_polar(1.0, to);
        let ei = Complex64::from_polar(1.0, ti);
        let c = mobius_scalar(bo, to, bi);
        let denom = 1.0 + bo.conj() * eo * bi;
        let deriv = (1.0 - bo.norm_sqr()) / (denom * denom) * eo * ei * (1.0 - bi.norm_sqr());
        let phase = deriv / (1.0 - c.norm_sqr());
        perm.push(inner.perm[k]);
        theta.push(phase.arg());
        b.push(c);
    }
    CandidateAutomorphism::new(perm, theta, b)
}

/// Evaluate `outer ∘ inner` without symbolic composition; works with
/// higher-order terms.
pub fn compose_eval(
    outer: &CandidateAutomorphism,
    inner: &CandidateAutomorphism,
    x: &MatrixTuple,
    mode: EvalMode,
) -> Result<MatrixTuple> {
    eval(outer, &eval(inner, x, mode)?, mode)
}

/// `φ^{(p)}`, `p ≥ 1`.
pub fn power(cand: &CandidateAutomorphism, p: usize) -> Result<CandidateAutomorphism> {
    if p == 0 {
        return Ok(CandidateAutomorphism::identity(cand.g()));
    }
    let mut acc = cand.clone();
    for _ in 1..p {
        acc = compose(cand, &acc)?;
    }
    Ok(acc)
}

#[derive(Debug, Clone)]
pub struct Stabilization {
    /// `n = N·ℓ`.
    pub n: usize,
    /// First `N` with `𝓕_{φ^{(N)}} = 𝓕_{φ^{(N+1)}}`.
    pub support_index: usize,
    /// Order of the permutation of `φ^{(N)}` restricted to the neutral set.
    pub cycle_order: usize,
    pub support: Vec<usize>,
    pub stabilized: CandidateAutomorphism,
}

/// Find `n` with `ψ = φ^{(n)}` acting as the identity permutation on the
/// neutral coordinates and with stable fixed support under further powers.
pub fn power_stabilize(cand: &CandidateAutomorphism, neutral: &[usize]) -> Result<Stabilization> {
    let g = cand.g();
    if let Some(&bad) = neutral.iter().find(|&&j| j == 0 || j > g) {
        return Err(Error::IndexOutOfRange { index: bad, max: g });
    }
    let first_support = fixed_support(cand, SUPPORT_TOL);
    let mut current = cand.clone();
    let mut support = first_support.clone();
    let mut big_n = 1;
    loop {
        let next = compose(cand, &current)?;
        let next_support = fixed_support(&next, SUPPORT_TOL);
        if next_support == support {
            break;
        }
        if big_n > g + 1 {
            return Err(Error::NotAutomorphism("fixed support never stabilizes".into()));
        }
        big_n += 1;
        current = next;
        support = next_support;
    }
    let sigma = current.perm().to_vec();
    if let Some(&j) = neutral.iter().find(|&&j| !neutral.contains(&sigma[j - 1])) {
        return Err(Error::NotAutomorphism(format!(
            "permutation maps neutral index {j} to {}",
            sigma[j - 1]
        )));
    }
    let limit = factorial(g).max(1);
    let mut ell = 1;
    let mut image: Vec<usize> = neutral.to_vec();
    loop {
        image = image.iter().map(|&j| sigma[j - 1]).collect();
        if image == neutral {
            break;
        }
        ell += 1;
        if ell > limit {
            return Err(Error::NotAutomorphism("permutation order exceeds g!".into()));
        }
    }
    let psi = power(&current, ell)?;
    let psi_support = fixed_support(&psi, SUPPORT_TOL);
    if !first_support.iter().all(|j| psi_support.contains(j)) {
        return Err(Error::NotAutomorphism("stabilized support lost an index".into()));
    }
    for m in 1..=3 {
        let pm = power(&psi, m)?;
        let identity_on_neutral = neutral.iter().all(|&j| pm.perm()[j - 1] == j);
        if !identity_on_neutral || fixed_support(&pm, SUPPORT_TOL) != psi_support {
            return Err(Error::NotAutomorphism(format!("power {m} of the stabilized map is not stable")));
        }
    }
    Ok(Stabilization {
        n: big_n * ell,
        support_index: big_n,
        cycle_order: ell,
        support: psi_support,
        stabilized: psi,
    })
}

fn factorial(n: usize) -> usize {
    (1..=n).fold(1usize, |a, k| a.saturating_mul(k))
}

/// `𝔪̂_b^{(m)}(0)`.
pub fn mobius_origin_orbit(b: f64, m: usize) -> f64 {
    (0..m).fold(0.0, |x, _| mobius_hat(b, x))
}

/// First `m ≤ max_iter` with `𝔪̂_b^{(m)}(0) ≥ lambda`.
pub fn orbit_crossing(b: f64, lambda: f64, max_iter: usize) -> Option<usize> {
    let mut x = 0.0;
    for m in 1..=max_iter {
        x = mobius_hat(b, x);
        if x >= lambda {
            return Some(m);
        }
    }
    None
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SamplePlan {
    pub levels: Vec<usize>,
    pub interior_samples: usize,
    pub include_structured: bool,
    pub include_nilpotent: bool,
    pub seed: u64,
    pub tol: f64,
    pub eval_mode: EvalMode,
}

impl Default for SamplePlan {
    fn default() -> Self {
        SamplePlan {
            levels: vec![1, 2, 3],
            interior_samples: 200,
            include_structured: true,
            include_nilpotent: true,
            seed: 0,
            tol: DEFAULT_TOL,
            eval_mode: EvalMode::Strict,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SampleFamily {
    Interior { level: usize },
    Structured { kind: StructuredKind, k: usize },
    Nilpotent { k: usize, order: usize },
}

#[derive(Debug, Clone)]
pub struct Witness {
    pub family: SampleFamily,
    pub input: MatrixTuple,
    pub image: MatrixTuple,
    pub input_kind: Membership,
    pub input_margin: f64,
    pub image_kind: Membership,
    pub image_margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Default)]
pub struct VerifyReport {
    pub samples: usize,
    pub skipped_outside: usize,
    pub interior_to_interior: usize,
    pub interior_to_boundary: usize,
    pub boundary_to_boundary: usize,
    pub failures: Vec<Witness>,
    pub eval_errors: Vec<(SampleFamily, String)>,
    /// Smallest image margin over evaluated samples.
    pub worst_margin: Option<f64>,
}

impl VerifyReport {
    pub fn verdict(&self) -> Verdict {
        if self.failures.is_empty() {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    /// The failure with the most negative image margin.
    pub fn witness(&self) -> Option<&Witness> {
        self.failures
            .iter()
            .min_by(|a, b| a.image_margin.total_cmp(&b.image_margin))
    }
}

/// Every input tuple the plan asks for, paired with its family.
pub fn plan_samples(p: &Pencil, plan: &SamplePlan) -> Vec<(SampleFamily, MatrixTuple)> {
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let g = p.g();
    let mut out = Vec::new();
    if plan.include_structured {
        for kind in StructuredKind::ALL {
            for k in 1..=g {
                if let Ok(ts) = p.structured_boundary_tuples(kind, k) {
                    out.extend(ts.into_iter().map(|t| (SampleFamily::Structured { kind, k }, t)));
                }
            }
        }
    }
    if plan.include_nilpotent {
        for k in 1..=g {
            for order in [2usize, 3] {
                let weights: Vec<Vec<Complex64>> = (0..g)
                    .map(|l| {
                        (0..order)
                            .map(|u| {
                                if l + 1 == k && u == 0 {
                                    c64(1.0, 0.0)
                                } else if l + 1 == k {
                                    Complex64::from_polar(rng.random_range(0.5..1.0), rng.random_range(0.0..std::f64::consts::TAU))
                                } else {
                                    Complex64::from_polar(rng.random_range(0.0..0.2), rng.random_range(0.0..std::f64::consts::TAU))
                                }
                            })
                            .collect()
                    })
                    .collect();
                if let Ok(t) = nilpotent_shift_family(g, order, &weights, k) {
                    out.push((SampleFamily::Nilpotent { k, order }, t));
                }
            }
        }
    }
    if !plan.levels.is_empty() {
        for i in 0..plan.interior_samples {
            let level = plan.levels[i % plan.levels.len()];
            out.push((SampleFamily::Interior { level }, random_interior(&mut rng, p, level)));
        }
    }
    out
}

/// Refutation search: push the plan's samples through the candidate and
/// check that Interior lands in the closure and Boundary stays on it.
pub fn verify_automorphism(p: &Pencil, cand: &CandidateAutomorphism, plan: &SamplePlan) -> VerifyReport {
    let mut report = VerifyReport::default();
    if cand.g() != p.g() {
        report.eval_errors.push((
            SampleFamily::Interior { level: 0 },
            format!("candidate g = {} but pencil g = {}", cand.g(), p.g()),
        ));
        return report;
    }
    for (family, x) in plan_samples(p, plan) {
        let input = match p.membership(&x, plan.tol) {
            Ok(v) => v,
            Err(e) => {
                report.eval_errors.push((family, e.to_string()));
                continue;
            }
        };
        if input.kind == Membership::Outside {
            report.skipped_outside += 1;
            continue;
        }
        let image = match eval(cand, &x, plan.eval_mode).and_then(|y| p.membership(&y, plan.tol).map(|v| (y, v))) {
            Ok(v) => v,
            Err(e) => {
                report.eval_errors.push((family, e.to_string()));
                continue;
            }
        };
        let (y, out) = image;
        report.samples += 1;
        report.worst_margin = Some(report.worst_margin.map_or(out.margin, |w: f64| w.min(out.margin)));
        let ok = match (input.kind, out.kind) {
            (Membership::Interior, Membership::Interior) => {
                report.interior_to_interior += 1;
                true
            }
            (Membership::Interior, Membership::Boundary) => {
                report.interior_to_boundary += 1;
                true
            }
            (Membership::Boundary, Membership::Boundary) => {
                report.boundary_to_boundary += 1;
                true
            }
            _ => false,
        };
        if !ok {
            report.failures.push(Witness {
                family,
                input: x,
                image: y,
                input_kind: input.kind,
                input_margin: input.margin,
                image_kind: out.kind,
                image_margin: out.margin,
            });
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::op_norm;
    use crate::sampling::{random_contraction, random_phase};
    use std::f64::consts::PI;

    fn r(x: f64) -> Complex64 {
        c64(x, 0.0)
    }

    fn random_perm(rng: &mut ChaCha8Rng, g: usize) -> Vec<usize> {
        let mut p: Vec<usize> = (1..=g).collect();
        for i in (1..g).rev() {
            let j = rng.random_range(0..=i);
            p.swap(i, j);
        }
        p
    }

    fn random_candidate(rng: &mut ChaCha8Rng, g: usize) -> CandidateAutomorphism {
        let perm = random_perm(rng, g);
        let theta = (0..g).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
        let b = (0..g).map(|_| random_phase(rng) * rng.random_range(0.0..0.9)).collect();
        CandidateAutomorphism::new(perm, theta, b).unwrap()
    }

    #[test]
    fn candidate_validation() {
        assert!(CandidateAutomorphism::new(vec![1, 1], vec![0.0; 2], vec![r(0.0); 2]).is_err());
        assert!(CandidateAutomorphism::new(vec![1], vec![0.0], vec![r(1.0)]).is_err());
        let c = CandidateAutomorphism::identity(2);
        let bad = FreeSeries::from_terms(2, [(vec![1, 1], r(0.1))]).unwrap();
        assert!(c.clone().with_higher(vec![bad, FreeSeries::new(2)]).is_err());
        let short = FreeSeries::from_terms(2, [(vec![2], r(0.1))]).unwrap();
        assert!(c.clone().with_higher(vec![short, FreeSeries::new(2)]).is_err());
        let ok = FreeSeries::from_terms(2, [(vec![1, 2], r(0.1))]).unwrap();
        assert!(c.with_higher(vec![ok, FreeSeries::new(2)]).is_ok());
    }

    #[test]
    fn mobius_matrix_cases() {
        let x = crate::sampling::random_matrix(&mut ChaCha8Rng::seed_from_u64(40), 3, 3).scale(0.2);
        assert_eq!(mobius_matrix(r(0.3), 0.7, &zeros(3, 3)).unwrap(), identity(3) * r(0.3));
        let y = mobius_matrix(r(0.0), 0.7, &x).unwrap();
        assert!((y - &x * Complex64::from_polar(1.0, 0.7)).norm() < 1e-15);
        let y = mobius_matrix(r(0.5), 0.0, &CMatrix::from_element(1, 1, r(0.5))).unwrap();
        assert!((y[(0, 0)] - r(0.8)).norm() < 1e-15);
        let pole = CMatrix::from_element(1, 1, r(-2.0));
        assert!(matches!(mobius_matrix(r(0.5), 0.0, &pole), Err(Error::NearSingular { .. })));
    }

    #[test]
    fn mobius_matrix_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..50 {
            let b = random_phase(&mut rng) * rng.random_range(0.0..0.9);
            let theta = rng.random_range(0.0..2.0 * PI);
            let x = random_contraction(&mut rng, 3, 1.0);
            let y = mobius_matrix(b, theta, &x).unwrap();
            assert!(op_norm(&y) <= 1.0 + 1e-9);
            let inv = CandidateAutomorphism::new(vec![1], vec![theta], vec![b]).unwrap().inverse().unwrap();
            let back = mobius_matrix(inv.b()[0], inv.theta()[0], &y).unwrap();
            assert!((back - &x).norm() < 1e-8);
            let u = crate::sampling::random_unitary(&mut rng, 3);
            let lhs = mobius_matrix(b, theta, &(u.adjoint() * &x * &u)).unwrap();
            assert!((lhs - u.adjoint() * &y * &u).norm() < 1e-10);
        }
    }

    #[test]
    fn eval_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let x = crate::sampling::random_tuple(&mut rng, 3, 2).scaled(0.2);
        assert_eq!(eval(&CandidateAutomorphism::identity(3), &x, EvalMode::Strict).unwrap(), x);
        let theta = vec![0.3, 1.1, -2.0];
        let trivial = CandidateAutomorphism::trivial(theta.clone()).unwrap();
        let gamma: Vec<_> = theta.iter().map(|&t| Complex64::from_polar(1.0, t)).collect();
        let y = eval(&trivial, &x, EvalMode::Strict).unwrap();
        assert!(y.distance(&crate::pencil::trivial_scale(&gamma, &x).unwrap()) < 1e-15);
        let c = CandidateAutomorphism::new(vec![1], vec![0.0], vec![r(0.5)]).unwrap();
        let s = MatrixTuple::from_vec(vec![jordan_shift(2)]).unwrap();
        let y = eval(&c, &s, EvalMode::Strict).unwrap();
        let expect = CMatrix::from_row_slice(2, 2, &[r(0.5), r(0.75), r(0.0), r(0.5)]);
        assert!((y.coord(1) - expect).norm() < 1e-15);
        // a swap moves the input coordinates
        let swap = CandidateAutomorphism::new(vec![2, 1], vec![0.0; 2], vec![r(0.0); 2]).unwrap();
        let x2 = crate::sampling::random_tuple(&mut rng, 2, 2);
        let y = eval(&swap, &x2, EvalMode::Strict).unwrap();
        assert_eq!(y.coord(1), x2.coord(2));
    }

    #[test]
    fn eval_with_higher_terms_needs_nilpotent_input_when_strict() {
        let h = FreeSeries::from_terms(2, [(vec![1, 2], r(0.5))]).unwrap();
        let c = CandidateAutomorphism::identity(2).with_higher(vec![h, FreeSeries::new(2)]).unwrap();
        let dense = MatrixTuple::from_vec(vec![identity(2).scale(0.1), identity(2).scale(0.1)]).unwrap();
        assert!(matches!(eval(&c, &dense, EvalMode::Strict), Err(Error::NotNilpotent { .. })));
        let y = eval(&c, &dense, EvalMode::Truncated).unwrap();
        assert!((y.coord(1) - identity(2).scale(0.1 + 0.005)).norm() < 1e-15);
    }

    #[test]
    fn affine_linear_extraction() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..20 {
            let g = rng.random_range(1..=4);
            let c = random_candidate(&mut rng, g);
            let a = extract_affine_linear(|x| eval(&c, x, EvalMode::Strict), g).unwrap();
            assert!(a.is_scaled_permutation);
            for j in 0..g {
                assert!((a.b[j] - c.b()[j]).norm() < 1e-15);
                for k in 0..g {
                    let expect = if c.perm()[j] == k + 1 {
                        Complex64::from_polar(1.0, c.theta()[j]) * (1.0 - c.b()[j].norm_sqr())
                    } else {
                        r(0.0)
                    };
                    assert!((a.l[(j, k)] - expect).norm() < 1e-10);
                }
            }
        }
        let gamma = [c64(0.0, 1.0), r(-1.0)];
        let a = extract_affine_linear(|x| crate::pencil::trivial_scale(&gamma, x), 2).unwrap();
        assert_eq!(a.b, vec![r(0.0); 2]);
        assert!((a.l.clone() - crate::linalg::diag(&gamma)).norm() < 1e-15);
        let mixed = |x: &MatrixTuple| MatrixTuple::from_vec(vec![x.coord(1) + x.coord(2), x.coord(2).clone()]);
        assert!(!extract_affine_linear(mixed, 2).unwrap().is_scaled_permutation);
    }

    #[test]
    fn fixed_support_cases() {
        assert!(fixed_support(&CandidateAutomorphism::identity(2), SUPPORT_TOL).is_empty());
        let c = CandidateAutomorphism::new(vec![1, 2], vec![0.0; 2], vec![r(0.5), r(0.0)]).unwrap();
        assert_eq!(fixed_support(&c, SUPPORT_TOL), vec![1]);
        assert_eq!(fixed_support(&normalize(&c), SUPPORT_TOL), vec![1]);
    }

    #[test]
    fn normalize_cases() {
        let c = CandidateAutomorphism::new(vec![1], vec![0.0], vec![r(-0.5)]).unwrap();
        let n = normalize(&c);
        assert_eq!(n.b(), &[r(0.5)]);
        assert_eq!(n.theta(), &[0.0]);
        assert_eq!(normalize(&n), n);
        let c = CandidateAutomorphism::new(vec![1], vec![0.4], vec![c64(0.0, 0.3)]).unwrap();
        let n = normalize(&c);
        assert!((n.scalar_eval(&[r(0.0)]).unwrap()[0] - r(0.3)).norm() < 1e-15);
        let a = extract_affine_linear(|x| eval(&n, x, EvalMode::Strict), 1).unwrap();
        assert!(a.l[(0, 0)].im.abs() < 1e-15 && a.l[(0, 0)].re > 0.0);
    }

    #[test]
    fn normalize_is_rho_phi_tau() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        for _ in 0..30 {
            let g = rng.random_range(1..=4);
            let c = random_candidate(&mut rng, g);
            let h: Vec<FreeSeries> = (0..g)
                .map(|j| {
                    let other = (1..=g).find(|&l| l != c.perm()[j]);
                    match other {
                        Some(l) => FreeSeries::from_terms(g, [(vec![c.perm()[j], l], crate::sampling::gaussian(&mut rng))]).unwrap(),
                        None => FreeSeries::new(g),
                    }
                })
                .collect();
            let c = c.with_higher(h).unwrap();
            let n = normalize(&c);
            assert_eq!(normalize(&n), n);
            for (x, y) in c.b().iter().zip(n.b()) {
                assert_eq!(x.norm(), y.re);
            }
            // independent check: ρ(φ(τ(z))) at random scalar points
            let gamma: Vec<Complex64> = c.b().iter().map(|z| if z.norm() > 0.0 { z.conj() / z.norm() } else { r(1.0) }).collect();
            let mut alpha = vec![r(1.0); g];
            for j in 0..g {
                alpha[c.perm()[j] - 1] = Complex64::from_polar(1.0, -c.theta()[j]) * gamma[j].conj();
            }
            for _ in 0..5 {
                let z: Vec<Complex64> = (0..g).map(|_| random_phase(&mut rng) * 0.3).collect();
                let tz: Vec<Complex64> = z.iter().zip(&alpha).map(|(a, b)| a * b).collect();
                let phi = c.scalar_eval(&tz).unwrap();
                let psi = n.scalar_eval(&z).unwrap();
                for j in 0..g {
                    assert!((gamma[j] * phi[j] - psi[j]).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn compose_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(45);
        let c = random_candidate(&mut rng, 3);
        let id = compose(&CandidateAutomorphism::identity(3), &c).unwrap();
        for j in 0..3 {
            assert!((id.b()[j] - c.b()[j]).norm() < 1e-14);
            assert!((Complex64::from_polar(1.0, id.theta()[j]) - Complex64::from_polar(1.0, c.theta()[j])).norm() < 1e-12);
        }
        assert_eq!(id.perm(), c.perm());
        let o = CandidateAutomorphism::new(vec![1], vec![0.0], vec![r(0.5)]).unwrap();
        let i = CandidateAutomorphism::new(vec![1], vec![0.0], vec![r(0.8)]).unwrap();
        let k = compose(&o, &i).unwrap();
        assert!((k.b()[0] - r(1.3 / 1.4)).norm() < 1e-15);
        assert!(k.theta()[0].abs() < 1e-15);
    }

    #[test]
    fn compose_matches_pointwise_composition() {
        let mut rng = ChaCha8Rng::seed_from_u64(46);
        for _ in 0..50 {
            let g = rng.random_range(1..=4);
            let f = random_candidate(&mut rng, g);
            let h = random_candidate(&mut rng, g);
            let k = compose(&f, &h).unwrap();
            for _ in 0..20 {
                let z: Vec<Complex64> = (0..g).map(|_| random_phase(&mut rng) * rng.random_range(0.0..0.95)).collect();
                let direct = f.scalar_eval(&h.scalar_eval(&z).unwrap()).unwrap();
                let composed = k.scalar_eval(&z).unwrap();
                for j in 0..g {
                    assert!((direct[j] - composed[j]).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn compose_is_associative() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        for _ in 0..50 {
            let g = rng.random_range(1..=3);
            let (a, b, c) = (random_candidate(&mut rng, g), random_candidate(&mut rng, g), random_candidate(&mut rng, g));
            let left = compose(&compose(&a, &b).unwrap(), &c).unwrap();
            let right = compose(&a, &compose(&b, &c).unwrap()).unwrap();
            for _ in 0..20 {
                let z: Vec<Complex64> = (0..g).map(|_| random_phase(&mut rng) * rng.random_range(0.0..0.95)).collect();
                let (l, r2) = (left.scalar_eval(&z).unwrap(), right.scalar_eval(&z).unwrap());
                for j in 0..g {
                    assert!((l[j] - r2[j]).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn compose_rejects_higher_terms() {
        let h = FreeSeries::from_terms(2, [(vec![1, 2], r(0.1))]).unwrap();
        let c = CandidateAutomorphism::identity(2).with_higher(vec![h, FreeSeries::new(2)]).unwrap();
        assert!(compose(&c, &CandidateAutomorphism::identity(2)).is_err());
        assert!(compose(&CandidateAutomorphism::identity(1), &CandidateAutomorphism::identity(2)).is_err());
        let x = MatrixTuple::zeros(2, 2);
        assert!(compose_eval(&c, &c, &x, EvalMode::Strict).is_ok());
    }

    #[test]
    fn power_stabilize_cases() {
        let s = power_stabilize(&CandidateAutomorphism::trivial(vec![0.4, 1.0]).unwrap(), &[1, 2]).unwrap();
        assert_eq!(s.n, 1);
        let swap = CandidateAutomorphism::new(vec![2, 1], vec![0.0; 2], vec![r(0.0); 2]).unwrap();
        assert_eq!(power_stabilize(&swap, &[1, 2]).unwrap().n, 2);
        let m = CandidateAutomorphism::new(vec![1], vec![0.0], vec![r(0.5)]).unwrap();
        let s = power_stabilize(&m, &[1]).unwrap();
        assert_eq!((s.n, s.support.clone()), (1, vec![1]));
        let cycle = CandidateAutomorphism::new(vec![2, 3, 1], vec![0.0; 3], vec![r(0.0); 3]).unwrap();
        assert_eq!(power_stabilize(&cycle, &[1, 2, 3]).unwrap().n, 3);
        // 𝔑 = {1} not invariant under the swap
        assert!(matches!(power_stabilize(&swap, &[1]), Err(Error::NotAutomorphism(_))));
    }

    #[test]
    fn power_stabilize_grows_support_through_the_cycle() {
        // b on coordinate 1 only, 3-cycle: the support fills up over powers
        let c = CandidateAutomorphism::new(vec![2, 3, 1], vec![0.0; 3], vec![r(0.5), r(0.0), r(0.0)]).unwrap();
        let s = power_stabilize(&c, &[1, 2, 3]).unwrap();
        assert_eq!(s.support, vec![1, 2, 3]);
        assert_eq!(s.support_index, 3);
        // φ^{(3)} already fixes every coordinate
        assert_eq!(s.cycle_order, 1);
        assert_eq!(s.n, 3);
        assert_eq!(s.stabilized.perm(), &[1, 2, 3]);
    }

    #[test]
    fn origin_orbit_cases() {
        assert_eq!(mobius_origin_orbit(0.0, 7), 0.0);
        assert!((mobius_origin_orbit(0.5, 1) - 0.5).abs() < 1e-15);
        assert!((mobius_origin_orbit(0.5, 2) - 0.8).abs() < 1e-15);
        assert!((mobius_origin_orbit(0.5, 3) - 13.0 / 14.0).abs() < 1e-15);
        let m = orbit_crossing(0.5, 0.99, 1000).unwrap();
        assert!(mobius_origin_orbit(0.5, m) >= 0.99 && mobius_origin_orbit(0.5, m - 1) < 0.99);
        for b in [0.01, 0.1, 0.3, 0.5, 0.9] {
            let orbit: Vec<f64> = (0..10).map(|m| mobius_origin_orbit(b, m)).collect();
            assert!(orbit.windows(2).all(|w| w[1] > w[0] && w[1] < 1.0));
        }
    }

    #[test]
    fn verify_trivial_passes_on_chain() {
        let p = Pencil::chain(2);
        let c = CandidateAutomorphism::trivial(vec![0.3, 2.0]).unwrap();
        let plan = SamplePlan { interior_samples: 30, ..Default::default() };
        let rep = verify_automorphism(&p, &c, &plan);
        assert_eq!(rep.verdict(), Verdict::Pass);
        assert!(rep.samples > 30);
        assert!(rep.eval_errors.is_empty());
    }

    #[test]
    fn verify_mobius_fails_on_chain() {
        let p = Pencil::chain(2);
        let c = CandidateAutomorphism::new(vec![1, 2], vec![0.0; 2], vec![r(0.5), r(0.0)]).unwrap();
        let plan = SamplePlan { interior_samples: 20, ..Default::default() };
        let rep = verify_automorphism(&p, &c, &plan);
        assert_eq!(rep.verdict(), Verdict::Fail);
        let adjacent = rep
            .failures
            .iter()
            .find(|w| w.family == SampleFamily::Structured { kind: StructuredKind::AdjacentPair, k: 1 })
            .expect("adjacent pair refutes");
        let (_, link) = p.link_inequality(&adjacent.image, 1, DEFAULT_TOL).unwrap();
        assert!(link.margin <= -0.25);
        // witnesses re-check through the oracle
        for w in &rep.failures {
            let img = eval(&c, &w.input, EvalMode::Strict).unwrap();
            assert!(img.distance(&w.image) < 1e-14);
            assert_ne!(p.membership(&img, DEFAULT_TOL).unwrap().kind, Membership::Interior);
        }
    }

    #[test]
    fn verify_mobius_passes_on_disc_and_polydisc() {
        let plan = SamplePlan { interior_samples: 30, ..Default::default() };
        let c = CandidateAutomorphism::new(vec![1], vec![0.0], vec![r(0.5)]).unwrap();
        assert_eq!(verify_automorphism(&Pencil::disc(), &c, &plan).verdict(), Verdict::Pass);
        let mut rng = ChaCha8Rng::seed_from_u64(48);
        let c = random_candidate(&mut rng, 3);
        let rep = verify_automorphism(&Pencil::polydisc(3), &c, &plan);
        assert_eq!(rep.verdict(), Verdict::Pass, "{:?}", rep.witness().map(|w| (&w.family, w.image_margin)));
    }

    #[test]
    fn verify_is_deterministic_given_seed() {
        let p = Pencil::chain(2);
        let c = CandidateAutomorphism::new(vec![2, 1], vec![0.0; 2], vec![r(0.2), r(0.1)]).unwrap();
        let plan = SamplePlan { interior_samples: 10, seed: 9, ..Default::default() };
        let a = verify_automorphism(&p, &c, &plan);
        let b = verify_automorphism(&p, &c, &plan);
        assert_eq!(a.samples, b.samples);
        assert_eq!(a.worst_margin, b.worst_margin);
        assert_eq!(a.failures.len(), b.failures.len());
    }
}
