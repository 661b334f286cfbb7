//! File formats: assemblage documents and command reports.
//!
//! Documents are JSON with explicit `[re, im]` entry pairs, a
//! `schema_version` field, and strict rejection of unknown fields, so that
//! emitted files diff cleanly and `parse(emit(x)) == x` holds bit-exactly
//! (the serializer prints shortest round-tripping decimal forms).

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::assemblage::{MeasurementAssemblage, StateAssemblage};
use crate::error::{Error, Result};
use crate::linalg::{cpx, CMatrix, HermitianOperator};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AssemblageKind {
    State,
    Measurement,
}

/// On-disk form of a state or measurement assemblage. Elements are indexed
/// `[x][a][row][col]` with `[re, im]` pairs; measurement documents may
/// carry an explicit carrier projector (identity when absent).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct AssemblageDocument {
    pub schema_version: String,
    pub kind: AssemblageKind,
    pub dim: usize,
    pub n_inputs: usize,
    pub n_outputs: usize,
    pub elements: Vec<Vec<Vec<Vec<[f64; 2]>>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub carrier: Option<Vec<Vec<[f64; 2]>>>,
}

fn matrix_to_rows(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

fn rows_to_matrix(rows: &[Vec<[f64; 2]>], dim: usize, what: &str) -> Result<CMatrix> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(Error::Document { context: format!("{what}: expected {dim}x{dim} entries") });
    }
    Ok(CMatrix::from_fn(dim, dim, |i, j| cpx(rows[i][j][0], rows[i][j][1])))
}

impl AssemblageDocument {
    pub fn from_state(asm: &StateAssemblage) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            kind: AssemblageKind::State,
            dim: asm.dim(),
            n_inputs: asm.n_inputs(),
            n_outputs: asm.n_outputs(),
            elements: asm
                .elements()
                .iter()
                .map(|row| row.iter().map(|e| matrix_to_rows(e.matrix())).collect())
                .collect(),
            carrier: None,
        }
    }

    pub fn from_measurement(asm: &MeasurementAssemblage) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            kind: AssemblageKind::Measurement,
            dim: asm.dim(),
            n_inputs: asm.n_inputs(),
            n_outputs: asm.n_outputs(),
            elements: asm
                .elements()
                .iter()
                .map(|row| row.iter().map(|e| matrix_to_rows(e.matrix())).collect())
                .collect(),
            carrier: Some(matrix_to_rows(asm.carrier().matrix())),
        }
    }

    fn check_shape(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Document {
                context: format!(
                    "unsupported schema_version {:?}, expected {SCHEMA_VERSION:?}",
                    self.schema_version
                ),
            });
        }
        if self.elements.len() != self.n_inputs {
            return Err(Error::Document {
                context: format!(
                    "elements lists {} inputs, header says {}",
                    self.elements.len(),
                    self.n_inputs
                ),
            });
        }
        for (x, row) in self.elements.iter().enumerate() {
            if row.len() != self.n_outputs {
                return Err(Error::Document {
                    context: format!(
                        "input {x} lists {} outcomes, header says {}",
                        row.len(),
                        self.n_outputs
                    ),
                });
            }
        }
        Ok(())
    }

    fn parse_elements(&self) -> Result<Vec<Vec<HermitianOperator>>> {
        let mut out = Vec::with_capacity(self.n_inputs);
        for (x, row) in self.elements.iter().enumerate() {
            let mut parsed = Vec::with_capacity(self.n_outputs);
            for (a, entry) in row.iter().enumerate() {
                let m = rows_to_matrix(entry, self.dim, &format!("element ({a}|{x})"))?;
                let h = HermitianOperator::new(m).map_err(|e| Error::Document {
                    context: format!("element ({a}|{x}): {e}"),
                })?;
                parsed.push(h);
            }
            out.push(parsed);
        }
        Ok(out)
    }

    pub fn to_state(&self) -> Result<StateAssemblage> {
        if self.kind != AssemblageKind::State {
            return Err(Error::Document { context: "document is not a state assemblage".into() });
        }
        self.check_shape()?;
        let elements = self.parse_elements()?;
        let asm = StateAssemblage::new_unchecked(elements)?;
        let report = asm.validate();
        if let Some(v) = report.first() {
            return Err(Error::Document { context: format!("invalid state assemblage: {v}") });
        }
        Ok(asm)
    }

    pub fn to_measurement(&self) -> Result<MeasurementAssemblage> {
        if self.kind != AssemblageKind::Measurement {
            return Err(Error::Document {
                context: "document is not a measurement assemblage".into(),
            });
        }
        self.check_shape()?;
        let elements = self.parse_elements()?;
        let carrier = match &self.carrier {
            Some(rows) => HermitianOperator::new(rows_to_matrix(rows, self.dim, "carrier")?)
                .map_err(|e| Error::Document { context: format!("carrier: {e}") })?,
            None => HermitianOperator::identity(self.dim),
        };
        let asm = MeasurementAssemblage::new_unchecked(elements, carrier)?;
        let report = asm.validate();
        if let Some(v) = report.first() {
            return Err(Error::Document {
                context: format!("invalid measurement assemblage: {v}"),
            });
        }
        Ok(asm)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serialization")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

/// One result entry of a report.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum ReportValue {
    Flag(bool),
    Scalar(f64),
    Text(String),
    Matrix(Vec<Vec<[f64; 2]>>),
    List(Vec<f64>),
}

/// Condensed view of an SDP certificate attached to a report.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CertificateSummary {
    pub context: String,
    pub status: String,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub gap: f64,
    pub primal_residual: f64,
    pub min_block_eigenvalue: f64,
    pub iterations: usize,
}

impl CertificateSummary {
    pub fn from_solution(context: &str, sol: &crate::sdp::SdpSolution) -> Self {
        Self {
            context: context.to_string(),
            status: format!("{:?}", sol.status),
            primal_objective: sol.primal_objective,
            dual_objective: sol.dual_objective,
            gap: sol.gap,
            primal_residual: sol.primal_residual,
            min_block_eigenvalue: sol.min_block_eigenvalue,
            iterations: sol.iterations,
        }
    }
}

/// Self-describing command report: inputs digest, seed, tolerances, named
/// results, and certificate summaries. Re-running a search-free command
/// with the same inputs reproduces the report bit-identically.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ReportDocument {
    pub schema_version: String,
    pub command: String,
    pub inputs_digest: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub tolerances: BTreeMap<String, f64>,
    pub results: BTreeMap<String, ReportValue>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub certificates: Vec<CertificateSummary>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl ReportDocument {
    pub fn new(command: &str, inputs_digest: String, seed: Option<u64>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            command: command.to_string(),
            inputs_digest,
            seed,
            tolerances: BTreeMap::new(),
            results: BTreeMap::new(),
            certificates: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn tolerance(&mut self, name: &str, value: f64) -> &mut Self {
        self.tolerances.insert(name.to_string(), value);
        self
    }

    pub fn scalar(&mut self, name: &str, value: f64) -> &mut Self {
        self.results.insert(name.to_string(), ReportValue::Scalar(value));
        self
    }

    pub fn flag(&mut self, name: &str, value: bool) -> &mut Self {
        self.results.insert(name.to_string(), ReportValue::Flag(value));
        self
    }

    pub fn text(&mut self, name: &str, value: impl Into<String>) -> &mut Self {
        self.results.insert(name.to_string(), ReportValue::Text(value.into()));
        self
    }

    pub fn matrix(&mut self, name: &str, value: &CMatrix) -> &mut Self {
        self.results.insert(name.to_string(), ReportValue::Matrix(matrix_to_rows(value)));
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// SHA-256 hex digest of input bytes, for the report header.
pub fn digest_bytes(chunks: &[&[u8]]) -> String {
    use sha2::{Digest, Sha256};
    let mut hasher = Sha256::new();
    for c in chunks {
        hasher.update(c);
    }
    let out = hasher.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}
