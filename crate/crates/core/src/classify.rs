//! Index classification and structure detectors.
//!
//! For a pencil with blocks `C_1, …, C_g`, index `j` lies in `𝔷⁺` when
//! `L_A(δ_j + εδ_{j+1})` fails to be positive semidefinite for every
//! `ε > 0`, and in `𝔷⁻` when the same holds for `δ_j + εδ_{j−1}`. The
//! remaining indices form `𝔑`. [`classify_indices`] decides this exactly
//! through eigenspaces; [`classify_oracle_grid`] answers the same question by
//! evaluating the pencil on a grid of `ε` and is the reference the exact
//! method is tested against.
//!
//! The detectors are semi-decision procedures: a `CertifiedAtScale` verdict
//! only says that no sample at levels `n ≤ 3` refuted the property.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, c64, inv_sqrt, kron, matrix_unit, op_norm, CMatrix, DEFAULT_TOL};
use crate::pencil::{project, scaled_psd_tol, GeneralPencil, MatrixTuple, Membership, Pencil};
use crate::sampling::{boundary_scale, random_interior_supported, random_with_norm};

/// Threshold on `|λ − 1|` when extracting the top eigenspace of `C_j^*C_j`.
pub const EIGENSPACE_TOL: f64 = 1e-7;

/// Threshold on `‖C_{j+1}^* E‖` below which the eigenspace `E` counts as
/// annihilated.
pub const ANNIHILATION_TOL: f64 = 1e-7;

/// λ values used by the identity-substitution test.
pub const LAMBDA_GRID: [f64; 11] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.99];

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct IndexClassification {
    pub g: usize,
    pub zplus: Vec<usize>,
    pub zminus: Vec<usize>,
    pub neutral: Vec<usize>,
}

impl IndexClassification {
    fn from_sets(g: usize, zplus: Vec<usize>, zminus: Vec<usize>) -> Self {
        let neutral = (1..=g)
            .filter(|j| !zplus.contains(j) && !zminus.contains(j))
            .collect();
        IndexClassification {
            g,
            zplus,
            zminus,
            neutral,
        }
    }

    /// `𝔷 = 𝔷⁺ ∪ 𝔷⁻`, sorted.
    pub fn z(&self) -> Vec<usize> {
        (1..=self.g)
            .filter(|j| self.zplus.contains(j) || self.zminus.contains(j))
            .collect()
    }

    pub fn is_neutral(&self, j: usize) -> bool {
        self.neutral.contains(&j)
    }
}

/// `true` when the eigenspace of `gram` at 1 is not annihilated by `m`.
fn top_eigenspace_escapes(gram: &CMatrix, m: &CMatrix) -> Result<bool> {
    let e = linalg::eigenspace(gram, 1.0, EIGENSPACE_TOL)?;
    if e.ncols() == 0 {
        return Ok(false);
    }
    Ok(op_norm(&(m * e)) > ANNIHILATION_TOL)
}

/// Exact classification by eigenspace containment.
///
/// `j ∈ 𝔷⁺` iff the eigenspace of `C_j^*C_j` at 1 is not inside
/// `ker C_{j+1}^*`; `j ∈ 𝔷⁻` iff the eigenspace of `C_jC_j^*` at 1 is not
/// inside `ker C_{j−1}`. By convention `g ∉ 𝔷⁺` and `1 ∉ 𝔷⁻`.
pub fn classify_indices(p: &Pencil) -> IndexClassification {
    let g = p.g();
    let mut zplus = Vec::new();
    let mut zminus = Vec::new();
    for j in 1..=g {
        let c = p.block(j);
        if j < g {
            let gram = c.adjoint() * c;
            if top_eigenspace_escapes(&gram, &p.block(j + 1).adjoint()).expect("Gram matrix is Hermitian") {
                zplus.push(j);
            }
        }
        if j > 1 {
            let gram = c * c.adjoint();
            if top_eigenspace_escapes(&gram, p.block(j - 1)).expect("Gram matrix is Hermitian") {
                zminus.push(j);
            }
        }
    }
    IndexClassification::from_sets(g, zplus, zminus)
}

/// `{1, 1e-1, …, 1e-6}`.
pub fn default_grid() -> Vec<f64> {
    (0..=6).map(|k| 10f64.powi(-k)).collect()
}

fn scalar_point(g: usize, entries: &[(usize, f64)]) -> MatrixTuple {
    let mut v = vec![0.0; g];
    for &(j, x) in entries {
        v[j - 1] = x;
    }
    MatrixTuple::real_scalars(&v)
}

fn grid_feasible(p: &Pencil, grid: &[f64], point: impl Fn(f64) -> MatrixTuple) -> bool {
    grid.iter().any(|&eps| {
        p.margin(&point(eps))
            .map(|m| m >= -scaled_psd_tol(eps))
            .unwrap_or(false)
    })
}

/// Brute-force classification: `j ∉ 𝔷⁺` iff `L_A(δ_j + εδ_{j+1}) ⪰ 0` for
/// some `ε` in `grid`, and symmetrically for `𝔷⁻`.
pub fn classify_oracle_grid(p: &Pencil, grid: &[f64]) -> IndexClassification {
    let g = p.g();
    let zplus = (1..g)
        .filter(|&j| !grid_feasible(p, grid, |e| scalar_point(g, &[(j, 1.0), (j + 1, e)])))
        .collect();
    let zminus = (2..=g)
        .filter(|&j| !grid_feasible(p, grid, |e| scalar_point(g, &[(j, 1.0), (j - 1, e)])))
        .collect();
    IndexClassification::from_sets(g, zplus, zminus)
}

/// Indices `k` for which `L_A(εδ_{k−1} + δ_k + εδ_{k+1}) ⪰ 0` at some grid
/// `ε`, the two-sided description of `𝔑`.
pub fn two_sided_neutral(p: &Pencil, grid: &[f64]) -> Vec<usize> {
    let g = p.g();
    (1..=g)
        .filter(|&k| {
            grid_feasible(p, grid, |e| {
                let mut entries = vec![(k, 1.0)];
                if k > 1 {
                    entries.push((k - 1, e));
                }
                if k < g {
                    entries.push((k + 1, e));
                }
                scalar_point(g, &entries)
            })
        })
        .collect()
}

/// An LMI in the coordinates outside `𝓕`, obtained by freezing the
/// coordinates in `𝓕` at scalar centers.
#[derive(Debug, Clone)]
pub struct AuxPencil {
    /// Original (1-based) index of each remaining coordinate.
    pub coords: Vec<usize>,
    pub pencil: GeneralPencil,
}

/// `B_j = P^{-1/2} A_j P^{-1/2}` for `j ∉ 𝓕`, where
/// `P = I + Σ_{j∈𝓕} (A_j b̂_j + A_j^* b̂_j)`.
///
/// `Y` satisfies the resulting LMI exactly when the tuple with `b̂_j I` on
/// `𝓕` and `Y` elsewhere lies in the free spectrahedron. With `b̂ = 0` this
/// is the restriction pencil.
pub fn aux_pencil(p: &Pencil, frozen: &[usize], bhat: &[f64]) -> Result<AuxPencil> {
    if frozen.len() != bhat.len() {
        return Err(Error::Shape(format!(
            "{} frozen coordinates but {} centers",
            frozen.len(),
            bhat.len()
        )));
    }
    for (&j, &b) in frozen.iter().zip(bhat) {
        p.check_index(j)?;
        if !(b >= 0.0 && b.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "center at coordinate {j} must be a nonnegative number, got {b}"
            )));
        }
    }
    let d = p.d();
    let mut pm = linalg::identity(d);
    for (&j, &b) in frozen.iter().zip(bhat) {
        let a = p.coeff(j);
        pm += (a + a.adjoint()).scale(b);
    }
    let r = inv_sqrt(&pm, DEFAULT_TOL)?;
    let coords: Vec<usize> = (1..=p.g()).filter(|j| !frozen.contains(j)).collect();
    let coeffs = coords.iter().map(|&j| &r * p.coeff(j) * &r).collect();
    Ok(AuxPencil {
        coords,
        pencil: GeneralPencil { coeffs },
    })
}

/// The `Z` tuple at level `2n` built from `X` at level `n`.
///
/// `Z_j = e₁e₁^*⊗X_j` for `j < μ`, `Z_μ = e₁e₂^*⊗X_μ`,
/// `Z_{μ+1} = e₁e₁^*⊗X_{μ+1}`, and `Z_j = e_{ℓ_j}e_{ℓ_j}^*⊗X_j` for
/// `j > μ+1`, where `ell` lists `ℓ_{μ+2}, …, ℓ_g` in `{1, 2}`. Whenever
/// both halves `(X_1..X_μ, 0..)` and `(0.., X_{μ+1}..X_g)` lie in the closed
/// spectrahedron, so does `Z`.
pub fn build_nopi_tuple(p: &Pencil, x: &MatrixTuple, mu: usize, ell: &[usize]) -> Result<MatrixTuple> {
    let g = p.g();
    if mu == 0 || mu >= g {
        return Err(Error::IndexOutOfRange {
            index: mu,
            max: g.saturating_sub(1),
        });
    }
    if ell.len() != g - mu - 1 {
        return Err(Error::Shape(format!(
            "need {} choices of ℓ for g = {g}, μ = {mu}, got {}",
            g - mu - 1,
            ell.len()
        )));
    }
    if let Some(bad) = ell.iter().find(|&&l| l != 1 && l != 2) {
        return Err(Error::InvalidArgument(format!("ℓ must be 1 or 2, got {bad}")));
    }
    let (left, right) = halves(x, mu)?;
    for (name, half) in [("first", &left), ("second", &right)] {
        let v = p.membership(half, DEFAULT_TOL)?;
        if !v.in_closure() {
            return Err(Error::InvalidArgument(format!(
                "{name} half of X is outside the spectrahedron (margin {:.3e})",
                v.margin
            )));
        }
    }
    let e11 = matrix_unit(2, 0, 0);
    let e12 = matrix_unit(2, 0, 1);
    let e22 = matrix_unit(2, 1, 1);
    let mats = (1..=g)
        .map(|j| {
            let unit = if j == mu {
                &e12
            } else if j <= mu + 1 || ell[j - mu - 2] == 1 {
                &e11
            } else {
                &e22
            };
            kron(unit, x.coord(j))
        })
        .collect();
    MatrixTuple::from_vec(mats)
}

/// `Z_j = e₁e₁^*⊗T_j` for `j < ν`, `Z_ν = e₁e₂^*⊗T_ν`, `Z_j = e₂e₂^*⊗T_j`
/// for `j > ν`. Membership of `Z` forces membership of `T`.
pub fn nopi_minus_tuple(t: &MatrixTuple, nu: usize) -> Result<MatrixTuple> {
    let g = t.g();
    if nu < 2 || nu > g {
        return Err(Error::IndexOutOfRange { index: nu, max: g });
    }
    let e11 = matrix_unit(2, 0, 0);
    let e12 = matrix_unit(2, 0, 1);
    let e22 = matrix_unit(2, 1, 1);
    MatrixTuple::from_vec(
        (1..=g)
            .map(|j| {
                let unit = match j.cmp(&nu) {
                    std::cmp::Ordering::Less => &e11,
                    std::cmp::Ordering::Equal => &e12,
                    std::cmp::Ordering::Greater => &e22,
                };
                kron(unit, t.coord(j))
            })
            .collect(),
    )
}

/// `(X_1..X_ν, 0..)` and `(0.., X_{ν+1}..X_g)`.
fn halves(x: &MatrixTuple, nu: usize) -> Result<(MatrixTuple, MatrixTuple)> {
    let g = x.g();
    let first: Vec<usize> = (1..=nu).collect();
    let second: Vec<usize> = (nu + 1..=g).collect();
    Ok((project(&second, x)?, project(&first, x)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum StructureVerdict {
    CertifiedAtScale,
    Refuted,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "detector", rename_all = "snake_case")]
pub enum Detector {
    PolydiscSummand { set: Vec<usize> },
    DirectSum { nu: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MarginSummary {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, Default)]
struct MarginAcc {
    min: f64,
    max: f64,
    sum: f64,
    count: usize,
}

impl MarginAcc {
    fn push(&mut self, m: f64) {
        if self.count == 0 {
            self.min = m;
            self.max = m;
        } else {
            self.min = self.min.min(m);
            self.max = self.max.max(m);
        }
        self.sum += m;
        self.count += 1;
    }

    fn summary(&self) -> Option<MarginSummary> {
        (self.count > 0).then(|| MarginSummary {
            min: self.min,
            max: self.max,
            mean: self.sum / self.count as f64,
        })
    }
}

#[derive(Debug, Clone)]
pub struct StructureReport {
    pub detector: Detector,
    pub verdict: StructureVerdict,
    pub witness: Option<MatrixTuple>,
    pub witness_margin: Option<f64>,
    /// Tuples whose membership was decided.
    pub trials: usize,
    /// Tuples with a refuting membership verdict.
    pub refutations: usize,
    /// Tuples that landed within tolerance of the boundary.
    pub tolerance_zone: usize,
    /// Structured tuples among the trials.
    pub structured_trials: usize,
    /// Companion checks run, and how many of them disagreed.
    pub companion_checks: usize,
    pub companion_violations: usize,
    pub margins: Option<MarginSummary>,
    pub levels: Vec<usize>,
}

impl StructureReport {
    /// Re-derive the refutation from scratch through the membership oracle.
    /// Returns `false` when there is no witness or it does not refute.
    pub fn recheck_witness(&self, p: &Pencil, tol: f64) -> Result<bool> {
        let Some(t) = &self.witness else {
            return Ok(false);
        };
        if p.membership(t, tol)?.kind != Membership::Outside {
            return Ok(false);
        }
        match &self.detector {
            Detector::PolydiscSummand { set } => {
                let small = set.iter().all(|&j| op_norm(t.coord(j)) < 1.0);
                Ok(small && p.membership(&project(set, t)?, tol)?.kind == Membership::Interior)
            }
            Detector::DirectSum { nu } => {
                let (a, b) = halves(t, *nu)?;
                Ok(p.membership(&a, tol)?.kind == Membership::Interior
                    && p.membership(&b, tol)?.kind == Membership::Interior)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct DetectConfig {
    /// Random trials, shared across levels.
    pub budget: usize,
    pub seed: u64,
    pub levels: Vec<usize>,
    pub tol: f64,
}

impl Default for DetectConfig {
    fn default() -> Self {
        DetectConfig {
            budget: 500,
            seed: 0,
            levels: vec![1, 2, 3],
            tol: DEFAULT_TOL,
        }
    }
}

struct Tally {
    detector: Detector,
    tol: f64,
    witness: Option<(MatrixTuple, f64)>,
    trials: usize,
    refutations: usize,
    tolerance_zone: usize,
    structured_trials: usize,
    companion_checks: usize,
    companion_violations: usize,
    margins: MarginAcc,
}

impl Tally {
    fn new(detector: Detector, tol: f64) -> Self {
        Tally {
            detector,
            tol,
            witness: None,
            trials: 0,
            refutations: 0,
            tolerance_zone: 0,
            structured_trials: 0,
            companion_checks: 0,
            companion_violations: 0,
            margins: MarginAcc::default(),
        }
    }

    /// Record the membership of a tuple that the property says must be in
    /// the spectrahedron. The first refutation becomes the witness.
    fn record(&mut self, p: &Pencil, t: MatrixTuple) -> Result<()> {
        let v = p.membership(&t, self.tol)?;
        self.trials += 1;
        self.margins.push(v.margin);
        match v.kind {
            Membership::Interior => {}
            Membership::Boundary => self.tolerance_zone += 1,
            Membership::Outside => {
                self.refutations += 1;
                if self.witness.is_none() {
                    self.witness = Some((t, v.margin));
                }
            }
        }
        Ok(())
    }

    fn finish(self, levels: Vec<usize>) -> StructureReport {
        let verdict = if self.refutations > 0 {
            StructureVerdict::Refuted
        } else if self.tolerance_zone > 0 || self.companion_violations > 0 {
            StructureVerdict::Unknown
        } else {
            StructureVerdict::CertifiedAtScale
        };
        let (witness, witness_margin) = match self.witness {
            Some((t, m)) => (Some(t), Some(m)),
            None => (None, None),
        };
        StructureReport {
            detector: self.detector,
            verdict,
            witness,
            witness_margin,
            trials: self.trials,
            refutations: self.refutations,
            tolerance_zone: self.tolerance_zone,
            structured_trials: self.structured_trials,
            companion_checks: self.companion_checks,
            companion_violations: self.companion_violations,
            margins: self.margins.summary(),
            levels,
        }
    }
}

fn check_config(cfg: &DetectConfig) -> Result<()> {
    if cfg.levels.is_empty() || cfg.levels.contains(&0) {
        return Err(Error::InvalidArgument("levels must be a nonempty list of positive sizes".into()));
    }
    if !(cfg.tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {}", cfg.tol)));
    }
    Ok(())
}

/// Level-one point with all-ones direction on `active`, scaled to 0.99 of
/// its boundary distance.
fn corner_probe(p: &Pencil, active: &[usize]) -> MatrixTuple {
    let g = p.g();
    if active.is_empty() {
        return MatrixTuple::zeros(g, 1);
    }
    let dir = scalar_point(g, &active.iter().map(|&j| (j, 1.0)).collect::<Vec<_>>());
    let t = boundary_scale(p, &dir, 1e3);
    dir.scaled(0.99 * t)
}

/// Tests whether the coordinates in `set` form a distinguished polydisc
/// summand: `‖T_j‖ < 1` on `set` and `π_set(T)` in the spectrahedron should
/// force `T` into it.
///
/// Besides random trials, every sampled `Y` is checked through the
/// identity-substituted tuples `Y^λ` (`λI` on `set`) over [`LAMBDA_GRID`]
/// and their lifts with `λT_j` for random contractions `T_j`.
pub fn detect_polydisc_summand(p: &Pencil, set: &[usize], cfg: &DetectConfig) -> Result<StructureReport> {
    check_config(cfg)?;
    if set.is_empty() {
        return Err(Error::InvalidArgument("the coordinate set must be nonempty".into()));
    }
    for &j in set {
        p.check_index(j)?;
    }
    let mut set = set.to_vec();
    set.sort_unstable();
    set.dedup();
    let g = p.g();
    let rest: Vec<usize> = (1..=g).filter(|j| !set.contains(j)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut tally = Tally::new(Detector::PolydiscSummand { set: set.clone() }, cfg.tol);

    // Deterministic corner: Y near its boundary, 0.99 on the set.
    let mut probe = corner_probe(p, &rest);
    for &j in &set {
        probe.set_coord(j, CMatrix::from_element(1, 1, c64(0.99, 0.0)))?;
    }
    tally.structured_trials += 1;
    tally.record(p, probe)?;

    let levels = &cfg.levels;
    for i in 0..cfg.budget {
        let n = levels[i % levels.len()];
        let y = random_interior_supported(&mut rng, p, n, &rest);
        let mut t = y.clone();
        for &j in &set {
            let norm = if rng.random_bool(0.5) {
                rng.random_range(0.9..0.999)
            } else {
                rng.random_range(0.0..0.9)
            };
            t.set_coord(j, random_with_norm(&mut rng, n, n, norm))?;
        }
        tally.record(p, t)?;

        // Identity substitution and its contractive lift, on a tenth of the
        // samples to keep the cost comparable to the random trials.
        if i % 10 == 0 {
            for &lam in &LAMBDA_GRID {
                let mut ylam = y.clone();
                let mut lift = y.clone();
                for &j in &set {
                    ylam.set_coord(j, linalg::identity(n).scale(lam))?;
                    lift.set_coord(j, random_with_norm(&mut rng, n, n, 1.0).scale(lam))?;
                }
                tally.structured_trials += 2;
                tally.record(p, ylam)?;
                tally.record(p, lift)?;
            }
        }
    }
    Ok(tally.finish(cfg.levels.clone()))
}

/// Tests whether splitting the coordinates after `nu` is a coordinate direct
/// sum: membership of both projections should force membership of `T`.
///
/// Trials include random pairs of interior halves, a deterministic corner
/// point, and the doubled-level `Z` tuples of [`build_nopi_tuple`]. Every
/// random trial also runs the companion implication of
/// [`nopi_minus_tuple`] at split index `ν+1`.
pub fn detect_direct_sum(p: &Pencil, nu: usize, cfg: &DetectConfig) -> Result<StructureReport> {
    check_config(cfg)?;
    let g = p.g();
    if nu == 0 || nu >= g {
        return Err(Error::InvalidArgument(format!(
            "split index must satisfy 1 ≤ ν < g = {g}, got {nu}"
        )));
    }
    let first: Vec<usize> = (1..=nu).collect();
    let second: Vec<usize> = (nu + 1..=g).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut tally = Tally::new(Detector::DirectSum { nu }, cfg.tol);

    let probe = corner_probe(p, &first).add(&corner_probe(p, &second))?;
    tally.structured_trials += 1;
    tally.record(p, probe)?;

    let levels = &cfg.levels;
    for i in 0..cfg.budget {
        let n = levels[i % levels.len()];
        let a = random_interior_supported(&mut rng, p, n, &first);
        let b = random_interior_supported(&mut rng, p, n, &second);
        let t = a.add(&b)?;

        let z = nopi_minus_tuple(&t, nu + 1)?;
        tally.companion_checks += 1;
        if p.membership(&z, cfg.tol)?.in_closure() && !p.membership(&t, cfg.tol)?.in_closure() {
            tally.companion_violations += 1;
        }

        // Structured tuples at doubled level; they need n ≤ 2 to stay at
        // levels the dense eigensolver handles quickly.
        if n <= 2 && i % 5 == 0 {
            for mu in 1..g {
                let ell: Vec<usize> = (0..g - mu - 1).map(|_| rng.random_range(1..=2)).collect();
                if let Ok(zp) = build_nopi_tuple(p, &t, mu, &ell) {
                    let (za, zb) = halves(&zp, nu)?;
                    if p.membership(&za, cfg.tol)?.kind == Membership::Interior
                        && p.membership(&zb, cfg.tol)?.kind == Membership::Interior
                    {
                        tally.structured_trials += 1;
                        tally.record(p, zp)?;
                    }
                }
            }
        }
        tally.record(p, t)?;
    }
    Ok(tally.finish(cfg.levels.clone()))
}
