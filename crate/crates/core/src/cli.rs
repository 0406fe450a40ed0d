//! Command-line front end.
//!
//! Each verb reads JSON inputs (see [`crate::io`]), runs one library
//! operation and emits a [`RunReport`]. Exit codes: 0 ok, 1 refuted or
//! failed, 2 usage or input error, 3 numerical failure.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::caratheodory::{extreme_toeplitz, mobius_coeffs, rigidity_check, rigidity_lower_bound, toeplitz_from_coeffs};
use crate::classify::{
    classify_indices, classify_oracle_grid, default_grid, detect_direct_sum, detect_polydisc_summand,
    two_sided_neutral, DetectConfig, StructureReport, StructureVerdict,
};
use crate::error::{Error, Result};
use crate::freemap::{self, SamplePlan, Verdict, VerifyReport};
use crate::io::{self, CandidateFile, TupleFile, SCHEMA};
use crate::linalg::{op_norm, DEFAULT_TOL};
use crate::pencil::{EtaMode, Pencil, StructuredKind};

#[derive(Debug, Parser)]
#[command(name = "freespec", version, about = "Hyper-Reinhardt free spectrahedra toolkit")]
pub struct Cli {
    /// Absolute tolerance on smallest eigenvalues.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Random trials (defaults: 200 for verify, 500 for detect).
    #[arg(long, global = true)]
    pub budget: Option<usize>,
    /// Matrix levels to sample, comma separated.
    #[arg(long, global = true, value_delimiter = ',', default_value = "1,2,3")]
    pub levels: Vec<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Rescale pencil blocks to norm one instead of rejecting them.
    #[arg(long, global = true)]
    pub rescale_norms: bool,
    #[command(subcommand)]
    pub verb: Verb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Full,
    RightOnly,
    LeftOnly,
}

impl From<ModeArg> for EtaMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Full => EtaMode::Full,
            ModeArg::RightOnly => EtaMode::RightOnly,
            ModeArg::LeftOnly => EtaMode::LeftOnly,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    SingleShift,
    AdjacentPair,
    Staggered,
    EpsilonPair,
}

impl From<KindArg> for StructuredKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::SingleShift => StructuredKind::SingleShift,
            KindArg::AdjacentPair => StructuredKind::AdjacentPair,
            KindArg::Staggered => StructuredKind::Staggered,
            KindArg::EpsilonPair => StructuredKind::EpsilonPair,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Verb {
    /// Index sets 𝔷⁺, 𝔷⁻, 𝔑, cross-checked against the grid oracle.
    Classify { pencil: PathBuf },
    /// Membership verdict and margin of a tuple.
    Member { pencil: PathBuf, tuple: PathBuf },
    /// Perturbation radii η at each index.
    Eta {
        pencil: PathBuf,
        /// Single index; all indices when omitted.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
    },
    /// Sample-based refutation search for an automorphism candidate.
    Verify {
        pencil: PathBuf,
        candidate: PathBuf,
        #[arg(long)]
        no_structured: bool,
        #[arg(long)]
        no_nilpotent: bool,
    },
    /// Normalized form of a candidate.
    Normalize { candidate: PathBuf },
    /// `outer ∘ inner`.
    Compose { outer: PathBuf, inner: PathBuf },
    /// Polydisc-summand and direct-sum detectors.
    Detect {
        pencil: PathBuf,
        /// Coordinate set for the polydisc detector; all singletons when
        /// omitted.
        #[arg(long, value_delimiter = ',')]
        set: Option<Vec<usize>>,
        /// Split index for the direct-sum detector; all when omitted.
        #[arg(long)]
        nu: Option<usize>,
    },
    /// Extreme Toeplitz extension and rigidity sweep.
    Caratheodory { input: PathBuf },
    /// Dump structured boundary tuples.
    Sample {
        pencil: PathBuf,
        #[arg(long, value_enum)]
        kind: Option<KindArg>,
        #[arg(long)]
        k: Option<usize>,
    },
}

impl Verb {
    fn name(&self) -> &'static str {
        match self {
            Verb::Classify { .. } => "classify",
            Verb::Member { .. } => "member",
            Verb::Eta { .. } => "eta",
            Verb::Verify { .. } => "verify",
            Verb::Normalize { .. } => "normalize",
            Verb::Compose { .. } => "compose",
            Verb::Detect { .. } => "detect",
            Verb::Caratheodory { .. } => "caratheodory",
            Verb::Sample { .. } => "sample",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Ok,
    Refuted,
    NumericIssue,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Ok => 0,
            Outcome::Refuted => 1,
            Outcome::NumericIssue => 3,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema: &'static str,
    pub command: Vec<String>,
    pub verb: &'static str,
    pub seed: u64,
    pub outcome: Outcome,
    /// One-line summary, printed first in text mode.
    pub verdict: String,
    pub result: Value,
    pub wall_time_ms: f64,
    #[serde(skip)]
    text: Vec<String>,
}

fn tuple_json(t: &crate::pencil::MatrixTuple) -> Value {
    serde_json::to_value(TupleFile::from_tuple(t)).expect("tuple serializes")
}

fn radius_json(r: f64) -> Value {
    if r.is_finite() {
        json!(r)
    } else {
        json!("unbounded")
    }
}

fn fmt_set(s: &[usize]) -> String {
    let inner: Vec<String> = s.iter().map(|j| j.to_string()).collect();
    format!("{{{}}}", inner.join(","))
}

struct Body {
    outcome: Outcome,
    verdict: String,
    result: Value,
    text: Vec<String>,
}

/// Run one parsed command. `argv` is echoed into the report.
pub fn run(cli: &Cli, argv: Vec<String>) -> Result<RunReport> {
    if !(cli.tol > 0.0) {
        return Err(Error::InvalidArgument(format!("--tol must be positive, got {}", cli.tol)));
    }
    if cli.levels.is_empty() || cli.levels.contains(&0) {
        return Err(Error::InvalidArgument("--levels must list positive sizes".into()));
    }
    let start = Instant::now();
    let body = dispatch(cli)?;
    Ok(RunReport {
        schema: SCHEMA,
        command: argv,
        verb: cli.verb.name(),
        seed: cli.seed,
        outcome: body.outcome,
        verdict: body.verdict,
        result: body.result,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
        text: body.text,
    })
}

fn load_pencil(cli: &Cli, path: &PathBuf) -> Result<Pencil> {
    io::parse_pencil(path, cli.rescale_norms)
}

fn dispatch(cli: &Cli) -> Result<Body> {
    match &cli.verb {
        Verb::Classify { pencil } => classify_cmd(&load_pencil(cli, pencil)?),
        Verb::Member { pencil, tuple } => {
            let p = load_pencil(cli, pencil)?;
            let t = io::parse_tuple(tuple)?;
            let v = p.membership(&t, cli.tol)?;
            let kind = format!("{:?}", v.kind);
            Ok(Body {
                outcome: Outcome::Ok,
                verdict: format!("{kind} (margin {:.6e})", v.margin),
                result: json!({
                    "membership": kind,
                    "margin": v.margin,
                    "level": t.level(),
                    "kernel_dim": v.kernel.as_ref().map(|k| k.ncols()).unwrap_or(0),
                }),
                text: vec![format!("level     {}", t.level())],
            })
        }
        Verb::Eta { pencil, k, mode } => eta_cmd(&load_pencil(cli, pencil)?, *k, *mode),
        Verb::Verify {
            pencil,
            candidate,
            no_structured,
            no_nilpotent,
        } => {
            let p = load_pencil(cli, pencil)?;
            let c = io::parse_candidate(candidate)?;
            let plan = SamplePlan {
                levels: cli.levels.clone(),
                interior_samples: cli.budget.unwrap_or(200),
                include_structured: !no_structured,
                include_nilpotent: !no_nilpotent,
                seed: cli.seed,
                tol: cli.tol,
                ..SamplePlan::default()
            };
            Ok(verify_body(&p, &freemap::verify_automorphism(&p, &c, &plan)))
        }
        Verb::Normalize { candidate } => {
            let c = io::parse_candidate(candidate)?;
            let n = freemap::normalize(&c);
            Ok(candidate_body("normalized", &n))
        }
        Verb::Compose { outer, inner } => {
            let o = io::parse_candidate(outer)?;
            let i = io::parse_candidate(inner)?;
            Ok(candidate_body("composed", &freemap::compose(&o, &i)?))
        }
        Verb::Detect { pencil, set, nu } => {
            let p = load_pencil(cli, pencil)?;
            let cfg = DetectConfig {
                budget: cli.budget.unwrap_or(500),
                seed: cli.seed,
                levels: cli.levels.clone(),
                tol: cli.tol,
            };
            detect_cmd(&p, set.as_deref(), *nu, &cfg)
        }
        Verb::Caratheodory { input } => {
            let (seed, shift) = io::parse_caratheodory(input)?;
            caratheodory_cmd(&seed, &shift)
        }
        Verb::Sample { pencil, kind, k } => {
            let p = load_pencil(cli, pencil)?;
            sample_cmd(&p, *kind, *k)
        }
    }
}

fn classify_cmd(p: &Pencil) -> Result<Body> {
    let exact = classify_indices(p);
    let grid = default_grid();
    let oracle = classify_oracle_grid(p, &grid);
    let two_sided = two_sided_neutral(p, &grid);
    let agree = exact == oracle && two_sided == exact.neutral;
    let verdict = format!(
        "𝔷⁺={} 𝔷⁻={} 𝔑={}{}",
        fmt_set(&exact.zplus),
        fmt_set(&exact.zminus),
        fmt_set(&exact.neutral),
        if agree { "" } else { " (oracle disagrees)" }
    );
    Ok(Body {
        outcome: if agree { Outcome::Ok } else { Outcome::NumericIssue },
        verdict,
        result: json!({
            "g": p.g(),
            "zplus": exact.zplus,
            "zminus": exact.zminus,
            "neutral": exact.neutral,
            "oracle": {"zplus": oracle.zplus, "zminus": oracle.zminus, "neutral": oracle.neutral},
            "two_sided_neutral": two_sided,
            "oracle_agrees": agree,
        }),
        text: vec![
            format!("g         {}", p.g()),
            format!("oracle    𝔷⁺={} 𝔷⁻={}", fmt_set(&oracle.zplus), fmt_set(&oracle.zminus)),
            format!("two-sided 𝔑={}", fmt_set(&two_sided)),
        ],
    })
}

fn eta_cmd(p: &Pencil, k: Option<usize>, mode: Option<ModeArg>) -> Result<Body> {
    let ks: Vec<usize> = match k {
        Some(k) => vec![k],
        None => (1..=p.g()).collect(),
    };
    let modes: Vec<ModeArg> = match mode {
        Some(m) => vec![m],
        None => vec![ModeArg::Full, ModeArg::RightOnly, ModeArg::LeftOnly],
    };
    let mut rows = Vec::new();
    let mut text = vec!["k  mode        eta".to_string()];
    for &k in &ks {
        for &m in &modes {
            let r = p.eta_radius(k, m.into())?;
            let name = format!("{:?}", EtaMode::from(m));
            text.push(format!(
                "{k:<2} {name:<11} {}",
                if r.is_finite() { format!("{r:.9}") } else { "unbounded".into() }
            ));
            rows.push(json!({"k": k, "mode": name, "eta": radius_json(r)}));
        }
    }
    Ok(Body {
        outcome: Outcome::Ok,
        verdict: format!("{} radii", rows.len()),
        result: json!({"radii": rows}),
        text,
    })
}

fn verify_body(p: &Pencil, rep: &VerifyReport) -> Body {
    let verdict = rep.verdict();
    let witness = rep.witness().map(|w| {
        json!({
            "family": w.family,
            "input": tuple_json(&w.input),
            "image": tuple_json(&w.image),
            "input_kind": w.input_kind,
            "input_margin": w.input_margin,
            "image_kind": w.image_kind,
            "image_margin": w.image_margin,
        })
    });
    let mut text = vec![
        format!("samples   {}", rep.samples),
        format!("skipped   {} (outside)", rep.skipped_outside),
        format!(
            "kept      int→int {}  int→bdry {}  bdry→bdry {}",
            rep.interior_to_interior, rep.interior_to_boundary, rep.boundary_to_boundary
        ),
        format!("failures  {}", rep.failures.len()),
        format!("errors    {}", rep.eval_errors.len()),
    ];
    if let Some(w) = rep.witness() {
        text.push(format!(
            "witness   {} level {}: {:?} (margin {:.3e}) ↦ {:?} (margin {:.3e})",
            serde_json::to_string(&w.family).unwrap_or_default(),
            w.input.level(),
            w.input_kind,
            w.input_margin,
            w.image_kind,
            w.image_margin
        ));
    }
    let numeric_only = verdict == Verdict::Pass && rep.samples == 0 && !rep.eval_errors.is_empty();
    Body {
        outcome: match verdict {
            Verdict::Fail => Outcome::Refuted,
            Verdict::Pass if numeric_only => Outcome::NumericIssue,
            Verdict::Pass => Outcome::Ok,
        },
        verdict: match verdict {
            Verdict::Pass => "PASS".into(),
            Verdict::Fail => "FAIL".into(),
        },
        result: json!({
            "g": p.g(),
            "verdict": verdict,
            "samples": rep.samples,
            "skipped_outside": rep.skipped_outside,
            "interior_to_interior": rep.interior_to_interior,
            "interior_to_boundary": rep.interior_to_boundary,
            "boundary_to_boundary": rep.boundary_to_boundary,
            "failures": rep.failures.len(),
            "failing_families": rep.failures.iter().map(|w| &w.family).collect::<Vec<_>>(),
            "eval_errors": rep.eval_errors.iter().map(|(f, e)| json!({"family": f, "error": e})).collect::<Vec<_>>(),
            "worst_margin": rep.worst_margin,
            "witness": witness,
        }),
        text,
    }
}

fn candidate_body(label: &str, c: &freemap::CandidateAutomorphism) -> Body {
    let file = CandidateFile::from_candidate(c);
    let text = vec![
        format!("perm      {:?}", c.perm()),
        format!("theta     {:?}", c.theta()),
        format!(
            "b         [{}]",
            c.b().iter().map(|z| format!("{:.6}{:+.6}i", z.re, z.im)).collect::<Vec<_>>().join(", ")
        ),
    ];
    Body {
        outcome: Outcome::Ok,
        verdict: format!("{label} candidate, g = {}", c.g()),
        result: json!({"candidate": file}),
        text,
    }
}

fn structure_json(r: &StructureReport) -> Value {
    json!({
        "detector": r.detector,
        "verdict": r.verdict,
        "evidence": "sampling at the listed levels, not a proof",
        "levels": r.levels,
        "trials": r.trials,
        "refutations": r.refutations,
        "tolerance_zone": r.tolerance_zone,
        "structured_trials": r.structured_trials,
        "companion_checks": r.companion_checks,
        "companion_violations": r.companion_violations,
        "margins": r.margins,
        "witness": r.witness.as_ref().map(tuple_json),
        "witness_margin": r.witness_margin,
    })
}

fn detect_cmd(p: &Pencil, set: Option<&[usize]>, nu: Option<usize>, cfg: &DetectConfig) -> Result<Body> {
    let sets: Vec<Vec<usize>> = match set {
        Some(s) => vec![s.to_vec()],
        None => (1..=p.g()).map(|j| vec![j]).collect(),
    };
    let nus: Vec<usize> = match nu {
        Some(v) => vec![v],
        None => (1..p.g()).collect(),
    };
    let mut reports = Vec::new();
    let mut text = Vec::new();
    for s in &sets {
        let r = detect_polydisc_summand(p, s, cfg)?;
        text.push(format!("polydisc  𝔍={:<8} {:?} ({} trials)", fmt_set(s), r.verdict, r.trials));
        reports.push(r);
    }
    for &v in &nus {
        let r = detect_direct_sum(p, v, cfg)?;
        text.push(format!("sum       ν={v:<8} {:?} ({} trials)", r.verdict, r.trials));
        reports.push(r);
    }
    let refuted = reports.iter().filter(|r| r.verdict == StructureVerdict::Refuted).count();
    let unknown = reports.iter().filter(|r| r.verdict == StructureVerdict::Unknown).count();
    Ok(Body {
        outcome: if refuted > 0 { Outcome::Refuted } else { Outcome::Ok },
        verdict: format!(
            "{refuted} refuted, {unknown} unknown, {} certified at scale",
            reports.len() - refuted - unknown
        ),
        result: json!({"reports": reports.iter().map(structure_json).collect::<Vec<_>>()}),
        text,
    })
}

fn caratheodory_cmd(
    seed: &crate::caratheodory::MobiusSeed,
    shift: &crate::caratheodory::WeightedShift,
) -> Result<Body> {
    let t = extreme_toeplitz(seed, shift)?;
    let norm = op_norm(&t);
    let coeffs = mobius_coeffs(seed, shift.order());
    let mut sweep = Vec::new();
    let mut text = vec![format!("order     {}", shift.order()), format!("norm      {norm:.12}")];
    let mut all_positive = true;
    for &r in &[1e-3, 1e-2, 1e-1] {
        for &phase in &[0.0, std::f64::consts::FRAC_PI_2, std::f64::consts::PI] {
            let mu = Complex64::from_polar(r, phase);
            let excess = rigidity_check(&t, mu);
            let bound = rigidity_lower_bound(seed, mu);
            all_positive &= excess > 0.0;
            sweep.push(json!({"mu": [mu.re, mu.im], "excess": excess, "lower_bound": bound}));
        }
        let last = &sweep[sweep.len() - 3..];
        let min = last.iter().filter_map(|v| v["excess"].as_f64()).fold(f64::INFINITY, f64::min);
        text.push(format!("|μ|={r:<6} min excess {min:.3e}"));
    }
    // Uniqueness: bumping one coefficient c_j (j ≥ 2) by 1e-2.
    let mut bumps = Vec::new();
    for j in 2..coeffs.len() {
        let mut c = coeffs.clone();
        c[j] += 1e-2;
        let n = op_norm(&toeplitz_from_coeffs(&c, shift)?);
        bumps.push(json!({"j": j, "norm": n}));
    }
    let ok = (norm - 1.0).abs() <= 1e-9 && all_positive;
    Ok(Body {
        outcome: if ok { Outcome::Ok } else { Outcome::NumericIssue },
        verdict: if ok {
            "norm one, rigid".into()
        } else {
            format!("unexpected: norm {norm:.12}")
        },
        result: json!({
            "coeffs": coeffs.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
            "norm": norm,
            "rigidity": sweep,
            "coefficient_bumps": bumps,
        }),
        text,
    })
}

fn sample_cmd(p: &Pencil, kind: Option<KindArg>, k: Option<usize>) -> Result<Body> {
    let kinds: Vec<StructuredKind> = match kind {
        Some(kd) => vec![kd.into()],
        None => StructuredKind::ALL.to_vec(),
    };
    let ks: Vec<usize> = match k {
        Some(k) => {
            p.structured_boundary_tuples(StructuredKind::SingleShift, k)?;
            vec![k]
        }
        None => (1..=p.g()).collect(),
    };
    let mut out = Vec::new();
    for &kd in &kinds {
        for &k in &ks {
            if let Ok(ts) = p.structured_boundary_tuples(kd, k) {
                for t in ts {
                    let v = p.membership(&t, DEFAULT_TOL)?;
                    out.push(json!({"kind": kd, "k": k, "membership": v.kind, "margin": v.margin, "tuple": tuple_json(&t)}));
                }
            }
        }
    }
    Ok(Body {
        outcome: Outcome::Ok,
        verdict: format!("{} structured tuples", out.len()),
        text: out
            .iter()
            .map(|v| format!("{:<13} k={} {}", v["kind"].as_str().unwrap_or(""), v["k"], v["membership"].as_str().unwrap_or("")))
            .collect(),
        result: json!({"tuples": out}),
    })
}

/// Render a report. Text mode starts with the verdict line.
pub fn emit(report: &RunReport, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Text => {
            let mut s = String::new();
            let _ = writeln!(s, "verdict: {}", report.verdict);
            let _ = writeln!(s, "command   {}", report.command.join(" "));
            let _ = writeln!(s, "seed      {}", report.seed);
            for line in &report.text {
                let _ = writeln!(s, "{line}");
            }
            let _ = writeln!(s, "time      {:.1} ms", report.wall_time_ms);
            s
        }
    }
}

fn error_code(e: &Error) -> i32 {
    if e.is_numeric() {
        3
    } else {
        2
    }
}

/// Parse `argv`, run, and return `(exit code, stdout, stderr)`.
pub fn run_args<I, S>(argv: I) -> (i32, String, String)
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            return if code == 0 {
                (0, rendered, String::new())
            } else {
                (2, String::new(), rendered)
            };
        }
    };
    let echo = argv.iter().skip(1).cloned().collect();
    match run(&cli, echo) {
        Ok(report) => (report.outcome.exit_code(), emit(&report, cli.format), String::new()),
        Err(e) => (error_code(&e), String::new(), format!("error: {e}\n")),
    }
}
