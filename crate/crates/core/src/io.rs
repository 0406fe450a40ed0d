//! JSON file formats.
//!
//! Every document may carry `"schema": "freespec/1"`; a different value is
//! rejected. Complex numbers are `[re, im]` pairs and matrices are row-major
//! nested lists of them.
//!
//! ```json
//! {"schema": "freespec/1", "dims": [1, 1, 1], "C": [[[[1, 0]]], [[[1, 0]]]]}
//! ```
//!
//! Errors carry a JSON pointer to the offending value.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::caratheodory::{FreeSeries, MobiusSeed, WeightedShift};
use crate::error::{Error, Result};
use crate::freemap::CandidateAutomorphism;
use crate::linalg::{c64, CMatrix};
use crate::pencil::{MatrixTuple, Pencil};

pub const SCHEMA: &str = "freespec/1";

pub type WireComplex = [f64; 2];
pub type WireMatrix = Vec<Vec<WireComplex>>;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PencilFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub dims: Vec<usize>,
    #[serde(rename = "C")]
    pub blocks: Vec<WireMatrix>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TupleFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub n: usize,
    #[serde(rename = "X")]
    pub matrices: Vec<WireMatrix>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermFile {
    pub word: Vec<usize>,
    pub coeff: WireComplex,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub perm: Vec<usize>,
    pub theta: Vec<f64>,
    pub b: Vec<WireComplex>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub higher: Option<Vec<Vec<TermFile>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaratheodoryFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub c0: WireComplex,
    #[serde(default)]
    pub theta: f64,
    /// `λ₁, …, λ_n`; `λ₁` must be 1.
    pub weights: Vec<WireComplex>,
}

fn to_complex(z: WireComplex) -> Complex64 {
    c64(z[0], z[1])
}

fn to_wire(z: Complex64) -> WireComplex {
    [z.re, z.im]
}

fn schema_err(pointer: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Schema {
        pointer: pointer.into(),
        message: message.into(),
    }
}

pub fn matrix_from_wire(m: &WireMatrix, pointer: &str) -> Result<CMatrix> {
    let rows = m.len();
    let cols = m.first().map(|r| r.len()).unwrap_or(0);
    if rows == 0 || cols == 0 {
        return Err(schema_err(pointer, "matrix must have at least one row and column"));
    }
    for (i, row) in m.iter().enumerate() {
        if row.len() != cols {
            return Err(schema_err(
                format!("{pointer}/{i}"),
                format!("row has {} entries, expected {cols}", row.len()),
            ));
        }
        for (k, z) in row.iter().enumerate() {
            if !z[0].is_finite() || !z[1].is_finite() {
                return Err(schema_err(format!("{pointer}/{i}/{k}"), "entry is not finite"));
            }
        }
    }
    Ok(CMatrix::from_fn(rows, cols, |i, k| to_complex(m[i][k])))
}

pub fn matrix_to_wire(m: &CMatrix) -> WireMatrix {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|k| to_wire(m[(i, k)])).collect())
        .collect()
}

fn check_schema(tag: &Option<String>) -> Result<()> {
    match tag {
        Some(s) if s != SCHEMA => Err(schema_err("/schema", format!("expected \"{SCHEMA}\", got \"{s}\""))),
        _ => Ok(()),
    }
}

fn json_pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => out.push_str(variant),
            Segment::Unknown => out.push('?'),
        }
    }
    out
}

/// Deserialize `text`, reporting failures with a JSON pointer.
pub fn from_json_str<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let pointer = json_pointer(e.path());
        let inner = e.into_inner();
        let message = inner.to_string();
        schema_err(if pointer.is_empty() { "/".into() } else { pointer }, message)
    })
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

impl PencilFile {
    pub fn into_pencil(self, rescale: bool) -> Result<Pencil> {
        check_schema(&self.schema)?;
        let blocks = self
            .blocks
            .iter()
            .enumerate()
            .map(|(j, m)| matrix_from_wire(m, &format!("/C/{j}")))
            .collect::<Result<Vec<_>>>()?;
        Pencil::build(self.dims, blocks, rescale)
    }

    pub fn from_pencil(p: &Pencil) -> Self {
        PencilFile {
            schema: Some(SCHEMA.into()),
            dims: p.dims().to_vec(),
            blocks: p.blocks().iter().map(matrix_to_wire).collect(),
        }
    }
}

impl TupleFile {
    pub fn into_tuple(self) -> Result<MatrixTuple> {
        check_schema(&self.schema)?;
        if self.matrices.is_empty() {
            return Err(schema_err("/X", "tuple needs at least one matrix"));
        }
        let mut mats = Vec::with_capacity(self.matrices.len());
        for (j, m) in self.matrices.iter().enumerate() {
            let ptr = format!("/X/{j}");
            let mat = matrix_from_wire(m, &ptr)?;
            if mat.nrows() != self.n || mat.ncols() != self.n {
                return Err(schema_err(
                    ptr,
                    format!("matrix is {}x{}, declared n = {}", mat.nrows(), mat.ncols(), self.n),
                ));
            }
            mats.push(mat);
        }
        MatrixTuple::from_vec(mats)
    }

    pub fn from_tuple(t: &MatrixTuple) -> Self {
        TupleFile {
            schema: Some(SCHEMA.into()),
            n: t.level(),
            matrices: t.matrices().iter().map(matrix_to_wire).collect(),
        }
    }
}

pub fn series_from_wire(g: usize, terms: &[TermFile]) -> Result<FreeSeries> {
    FreeSeries::from_terms(g, terms.iter().map(|t| (t.word.clone(), to_complex(t.coeff))))
}

pub fn series_to_wire(s: &FreeSeries) -> Vec<TermFile> {
    s.terms()
        .map(|(w, &c)| TermFile {
            word: w.clone(),
            coeff: to_wire(c),
        })
        .collect()
}

impl CandidateFile {
    pub fn into_candidate(self) -> Result<CandidateAutomorphism> {
        check_schema(&self.schema)?;
        let g = self.perm.len();
        let b = self.b.iter().copied().map(to_complex).collect();
        let cand = CandidateAutomorphism::new(self.perm, self.theta, b)?;
        match self.higher {
            None => Ok(cand),
            Some(h) => {
                let series = h
                    .iter()
                    .enumerate()
                    .map(|(k, terms)| {
                        series_from_wire(g, terms).map_err(|e| schema_err(format!("/higher/{k}"), e.to_string()))
                    })
                    .collect::<Result<Vec<_>>>()?;
                cand.with_higher(series)
            }
        }
    }

    pub fn from_candidate(c: &CandidateAutomorphism) -> Self {
        CandidateFile {
            schema: Some(SCHEMA.into()),
            perm: c.perm().to_vec(),
            theta: c.theta().to_vec(),
            b: c.b().iter().copied().map(to_wire).collect(),
            higher: c.higher().map(|h| h.iter().map(series_to_wire).collect()),
        }
    }
}

impl CaratheodoryFile {
    pub fn into_parts(self) -> Result<(MobiusSeed, WeightedShift)> {
        check_schema(&self.schema)?;
        let seed = MobiusSeed::new(to_complex(self.c0), self.theta)?;
        let shift = WeightedShift::new(self.weights.iter().copied().map(to_complex).collect())?;
        Ok((seed, shift))
    }
}

pub fn parse_pencil_str(text: &str, rescale: bool) -> Result<Pencil> {
    from_json_str::<PencilFile>(text)?.into_pencil(rescale)
}

pub fn parse_tuple_str(text: &str) -> Result<MatrixTuple> {
    from_json_str::<TupleFile>(text)?.into_tuple()
}

pub fn parse_candidate_str(text: &str) -> Result<CandidateAutomorphism> {
    from_json_str::<CandidateFile>(text)?.into_candidate()
}

pub fn parse_caratheodory_str(text: &str) -> Result<(MobiusSeed, WeightedShift)> {
    from_json_str::<CaratheodoryFile>(text)?.into_parts()
}

pub fn parse_pencil(path: &Path, rescale: bool) -> Result<Pencil> {
    parse_pencil_str(&read(path)?, rescale)
}

pub fn parse_tuple(path: &Path) -> Result<MatrixTuple> {
    parse_tuple_str(&read(path)?)
}

pub fn parse_candidate(path: &Path) -> Result<CandidateAutomorphism> {
    parse_candidate_str(&read(path)?)
}

pub fn parse_caratheodory(path: &Path) -> Result<(MobiusSeed, WeightedShift)> {
    parse_caratheodory_str(&read(path)?)
}

/// Name → JSON text of the bundled example inputs.
pub fn bundled() -> BTreeMap<&'static str, &'static str> {
    BTreeMap::from([
        ("disc.json", include_str!("../data/disc.json")),
        ("chain.json", include_str!("../data/chain.json")),
        ("chain3.json", include_str!("../data/chain3.json")),
        ("split.json", include_str!("../data/split.json")),
        ("polydisc3.json", include_str!("../data/polydisc3.json")),
        ("mixed.json", include_str!("../data/mixed.json")),
    ])
}
