//! JSON instance files.
//!
//! ```json
//! { "name": "complex_m1", "seed": 7,
//!   "tolerance": { "rel_eps": 1e-9, "abs_eps": 1e-12 },
//!   "kind": "algebra",
//!   "payload": { "include_identity": true,
//!                "generators": [ { "shape": [2, 2], "data": [0, -1, 1, 0] } ] } }
//! ```
//!
//! Matrices are row-major with an explicit shape. Dimension sequences spell
//! an infinite entry as `"inf"`. Seed and tolerance may be omitted on input;
//! [`InstanceFile::with_defaults`] writes the defaults back explicitly.

use serde::{Deserialize, Serialize};

use crate::algebra::DEFAULT_SEED;
use crate::construct::GroupElement;
use crate::division::AlgebraType;
use crate::error::{Error, Result};
use crate::numeric::{RealMatrix, Tolerance, Vector};
use crate::ranges::{power_family, Dim, DimSequence};

/// Largest matrix side accepted from a file.
pub const MAX_MATRIX_DIM: usize = 64;
/// Largest number of generators, twists or schedule entries.
pub const MAX_ITEMS: usize = 512;
/// Largest materialized dimension sequence.
pub const MAX_SEQUENCE_LEN: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixSpec {
    pub shape: [usize; 2],
    pub data: Vec<f64>,
}

impl MatrixSpec {
    pub fn from_matrix(m: &RealMatrix) -> Self {
        MatrixSpec { shape: [m.rows(), m.cols()], data: m.row_major() }
    }

    pub fn to_matrix(&self) -> Result<RealMatrix> {
        let [r, c] = self.shape;
        if r == 0 || c == 0 || r > MAX_MATRIX_DIM || c > MAX_MATRIX_DIM {
            return Err(Error::ShapeMismatch(format!("shape {r}x{c} outside 1..={MAX_MATRIX_DIM}")));
        }
        if self.data.len() != r * c {
            return Err(Error::ShapeMismatch(format!("shape {r}x{c} needs {} entries, got {}", r * c, self.data.len())));
        }
        RealMatrix::from_row_major(r, c, &self.data)
    }
}

fn matrices(specs: &[MatrixSpec]) -> Result<Vec<RealMatrix>> {
    if specs.len() > MAX_ITEMS {
        return Err(Error::ShapeMismatch(format!("at most {MAX_ITEMS} matrices are accepted")));
    }
    specs.iter().map(MatrixSpec::to_matrix).collect()
}

pub fn vector_from(data: &[f64]) -> Result<Vector> {
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(Vector::from_column_slice(data))
}

/// A dimension sequence, given explicitly or by a rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum SequenceSpec {
    /// `dims[0] = head` (default `"inf"`), `dims[k] = floor(k^t)` up to `length - 1`.
    Power {
        t: f64,
        length: usize,
        #[serde(default = "infinite_head")]
        head: Dim,
    },
    Explicit { dims: Vec<Dim> },
    /// `K_k = base_{k - by}`.
    Shifted { base: Box<SequenceSpec>, by: usize },
}

fn infinite_head() -> Dim {
    Dim::Infinite
}

impl SequenceSpec {
    fn length(&self) -> usize {
        match self {
            SequenceSpec::Power { length, .. } => *length,
            SequenceSpec::Explicit { dims } => dims.len(),
            SequenceSpec::Shifted { base, by } => base.length().saturating_add(*by),
        }
    }

    pub fn materialize(&self) -> Result<DimSequence> {
        let len = self.length();
        if len == 0 || len > MAX_SEQUENCE_LEN {
            return Err(Error::ShapeMismatch(format!("sequence length {len} outside 1..={MAX_SEQUENCE_LEN}")));
        }
        match self {
            SequenceSpec::Power { t, length, head } => Ok(power_family(*t, length - 1)?.with_head(*head)),
            SequenceSpec::Explicit { dims } => DimSequence::new(dims.clone()),
            SequenceSpec::Shifted { base, by } => base.materialize()?.shifted(*by),
        }
    }
}

/// Optional second stage of a representation: the twist along a pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwistSpec {
    pub m_basis: MatrixSpec,
    pub n_basis: MatrixSpec,
    /// The automorphism is conjugation by this element.
    #[serde(default = "default_twist_by")]
    pub twist_by: GroupElement,
}

fn default_twist_by() -> GroupElement {
    GroupElement::J
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Algebra(AlgebraSpec),
    Pcs(PcsSpec),
    Rep(RepSpec),
    Pair(PairSpec),
    Ranges(RangesSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraSpec {
    pub generators: Vec<MatrixSpec>,
    pub include_identity: bool,
    /// Replaces each generator `G` by `P G P^-1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub similarity: Option<MatrixSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PcsSpec {
    pub schedule: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepSpec {
    pub twists: Vec<MatrixSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub twisted: Option<TwistSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSpec {
    pub m_basis: MatrixSpec,
    pub n_basis: MatrixSpec,
    pub unit: MatrixSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangesSpec {
    pub h: SequenceSpec,
    pub k: SequenceSpec,
    pub p_max: usize,
    pub horizon: usize,
}

impl Payload {
    pub fn kind(&self) -> &'static str {
        match self {
            Payload::Algebra(_) => "algebra",
            Payload::Pcs(_) => "pcs",
            Payload::Rep(_) => "rep",
            Payload::Pair(_) => "pair",
            Payload::Ranges(_) => "ranges",
        }
    }
}

/// What the suite checks an instance against.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectation {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algebra_type: Option<AlgebraType>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transitive: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    /// Name of the expected error variant, e.g. `"NotComplementary"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// `"Isomorphic"`, `"NonIsomorphic"` or `"Undecided"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInstance", into = "RawInstance")]
pub struct InstanceFile {
    pub name: String,
    pub description: Option<String>,
    pub seed: Option<u64>,
    pub tolerance: Option<Tolerance>,
    pub payload: Payload,
    pub expect: Option<Expectation>,
}

/// On-disk layout: the payload is decoded according to `kind`.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tolerance: Option<Tolerance>,
    kind: String,
    payload: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    expect: Option<Expectation>,
}

impl TryFrom<RawInstance> for InstanceFile {
    type Error = String;

    fn try_from(raw: RawInstance) -> std::result::Result<Self, String> {
        fn decode<T: serde::de::DeserializeOwned>(v: serde_json::Value) -> std::result::Result<T, String> {
            serde_json::from_value(v).map_err(|e| format!("payload: {e}"))
        }
        let payload = match raw.kind.as_str() {
            "algebra" => Payload::Algebra(decode(raw.payload)?),
            "pcs" => Payload::Pcs(decode(raw.payload)?),
            "rep" => Payload::Rep(decode(raw.payload)?),
            "pair" => Payload::Pair(decode(raw.payload)?),
            "ranges" => Payload::Ranges(decode(raw.payload)?),
            other => return Err(format!("unknown kind {other:?}")),
        };
        Ok(InstanceFile {
            name: raw.name,
            description: raw.description,
            seed: raw.seed,
            tolerance: raw.tolerance,
            payload,
            expect: raw.expect,
        })
    }
}

impl From<InstanceFile> for RawInstance {
    fn from(inst: InstanceFile) -> Self {
        let kind = inst.payload.kind().to_string();
        let payload = match &inst.payload {
            Payload::Algebra(p) => serde_json::to_value(p),
            Payload::Pcs(p) => serde_json::to_value(p),
            Payload::Rep(p) => serde_json::to_value(p),
            Payload::Pair(p) => serde_json::to_value(p),
            Payload::Ranges(p) => serde_json::to_value(p),
        }
        .expect("payload is serializable");
        RawInstance {
            name: inst.name,
            description: inst.description,
            seed: inst.seed,
            tolerance: inst.tolerance,
            kind,
            payload,
            expect: inst.expect,
        }
    }
}

impl InstanceFile {
    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn tolerance(&self) -> Tolerance {
        self.tolerance.unwrap_or_default()
    }

    /// The same instance with seed and tolerance made explicit.
    pub fn with_defaults(mut self) -> Self {
        self.seed = Some(self.seed());
        self.tolerance = Some(self.tolerance());
        self
    }

    /// Checks everything that does not require running a computation.
    pub fn validate(&self) -> Result<()> {
        self.tolerance().validate()?;
        match &self.payload {
            Payload::Algebra(AlgebraSpec { generators, similarity, .. }) => {
                let gens = matrices(generators)?;
                let n = gens.first().map(RealMatrix::rows).ok_or_else(|| Error::ShapeMismatch("no generators".into()))?;
                if gens.iter().any(|g| g.rows() != n || g.cols() != n) {
                    return Err(Error::ShapeMismatch("generators must be square of equal size".into()));
                }
                if let Some(p) = similarity {
                    let p = p.to_matrix()?;
                    if p.rows() != n || p.cols() != n {
                        return Err(Error::ShapeMismatch("similarity has the wrong size".into()));
                    }
                }
            }
            Payload::Pcs(PcsSpec { schedule }) => {
                if schedule.len() > MAX_ITEMS || schedule.len() * 2 > MAX_MATRIX_DIM {
                    return Err(Error::ShapeMismatch("schedule is too long".into()));
                }
            }
            Payload::Rep(RepSpec { twists, twisted }) => {
                let t = matrices(twists)?;
                if t.len() * 4 > MAX_MATRIX_DIM {
                    return Err(Error::ShapeMismatch("too many twists".into()));
                }
                if let Some(tw) = twisted {
                    tw.m_basis.to_matrix()?;
                    tw.n_basis.to_matrix()?;
                }
            }
            Payload::Pair(PairSpec { m_basis, n_basis, unit }) => {
                m_basis.to_matrix()?;
                n_basis.to_matrix()?;
                unit.to_matrix()?;
            }
            Payload::Ranges(RangesSpec { h, k, .. }) => {
                for s in [h, k] {
                    let len = s.length();
                    if len == 0 || len > MAX_SEQUENCE_LEN {
                        return Err(Error::ShapeMismatch(format!("sequence length {len} outside 1..={MAX_SEQUENCE_LEN}")));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Parses and validates an instance file.
pub fn parse_instance(text: &str) -> Result<InstanceFile> {
    let inst: InstanceFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    inst.validate()?;
    Ok(inst)
}

pub fn parse_matrix(text: &str) -> Result<RealMatrix> {
    let spec: MatrixSpec = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    spec.to_matrix()
}

pub fn parse_sequence(text: &str) -> Result<DimSequence> {
    let spec: SequenceSpec = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    spec.materialize()
}
