//! JSON documents written and read by the `scg` binary.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use scg_core::constructions::ScalarChoice;
use scg_core::search::NonexistenceCertificate;
use scg_core::sggi::{SCGRep, VerificationReport};
use scg_core::{Field, FieldElement, Matrix, QuadraticForm};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub p: u32,
    pub e: u32,
    /// Little-endian coefficients of the monic modulus.
    pub modulus: Vec<u32>,
}

impl FieldSpec {
    pub fn of(field: &Field) -> FieldSpec {
        FieldSpec { p: field.characteristic(), e: field.degree(), modulus: field.modulus().to_vec() }
    }

    pub fn to_field(&self) -> Result<Arc<Field>, CliError> {
        Field::with_modulus(self.p, self.e, &self.modulus)
            .map(Arc::new)
            .map_err(|e| CliError::Parse(format!("field: {e}")))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub command_line: Vec<String>,
    pub seed: u64,
    /// How the generators were obtained.
    pub method: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scalars: Option<ScalarChoice>,
    /// Diagonal of the template form, as field element codes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagonal: Option<Vec<FieldElement>>,
    /// Schläfli type of the rank 5 representation that was reduced.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_schlafli: Option<Vec<u64>>,
    #[serde(default)]
    pub reductions: usize,
    /// Excluded from the digest.
    pub timestamp: String,
}

impl Provenance {
    pub fn new(command_line: &[String], seed: u64, method: &str) -> Provenance {
        Provenance {
            command_line: command_line.to_vec(),
            seed,
            method: method.to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            ..Provenance::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepDocument {
    pub schema_version: u32,
    pub field: FieldSpec,
    pub dim: usize,
    /// Row-major codes of the upper-triangular form matrix.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub form: Option<Vec<u32>>,
    /// Row-major codes of each generator.
    pub generators: Vec<Vec<u32>>,
    pub schlafli: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group_order: Option<u128>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<VerificationReport>,
    pub provenance: Provenance,
    /// SHA-256 of the document with `digest` and the timestamp blanked.
    #[serde(default)]
    pub digest: String,
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl RepDocument {
    pub fn from_rep(rep: &SCGRep, form: Option<&QuadraticForm>, provenance: Provenance) -> RepDocument {
        let mut doc = RepDocument {
            schema_version: SCHEMA_VERSION,
            field: FieldSpec::of(rep.field()),
            dim: rep.dim(),
            form: form.map(|f| f.phi().to_codes()),
            generators: rep.generators().iter().map(Matrix::to_codes).collect(),
            schlafli: rep.schlafli().to_vec(),
            group_order: rep.group_order(),
            report: rep.report().cloned(),
            provenance,
            digest: String::new(),
        };
        doc.seal();
        doc
    }

    pub fn body_digest(&self) -> String {
        let mut body = self.clone();
        body.digest.clear();
        body.provenance.timestamp.clear();
        sha256_hex(&serde_json::to_vec(&body).expect("serializable"))
    }

    pub fn seal(&mut self) {
        self.digest = self.body_digest();
    }

    pub fn digest_ok(&self) -> bool {
        self.digest == self.body_digest()
    }

    /// Field, generators and form, with every code range-checked.
    pub fn rebuild(&self) -> Result<(Arc<Field>, Vec<Matrix>, Option<QuadraticForm>), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Parse(format!("unsupported schema_version {}", self.schema_version)));
        }
        let field = self.field.to_field()?;
        let matrix = |codes: &[u32], what: &str| {
            Matrix::from_codes(&field, self.dim, codes).map_err(|e| CliError::Parse(format!("{what}: {e}")))
        };
        let gens = self
            .generators
            .iter()
            .enumerate()
            .map(|(k, c)| matrix(c, &format!("generator {k}")))
            .collect::<Result<Vec<_>, _>>()?;
        let form = match &self.form {
            Some(c) => Some(
                QuadraticForm::new(field.clone(), matrix(c, "form")?)
                    .map_err(|e| CliError::Parse(format!("form: {e}")))?,
            ),
            None => None,
        };
        Ok((field, gens, form))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<RepDocument, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<RepDocument, CliError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchResult {
    Found,
    /// Exhaustively shown empty, or ruled out by the rank restriction.
    None,
    /// Nothing found within the searched space or budget; not a proof.
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchDocument {
    pub schema_version: u32,
    pub field: FieldSpec,
    pub rank: usize,
    pub mode: String,
    pub result: SearchResult,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group_order: Option<u128>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub found: Vec<RepDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<NonexistenceCertificate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub argument: Option<String>,
    pub candidates: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub depth_counts: Vec<u64>,
    pub provenance: Provenance,
    #[serde(default)]
    pub digest: String,
}

impl SearchDocument {
    pub fn body_digest(&self) -> String {
        let mut body = self.clone();
        body.digest.clear();
        body.provenance.timestamp.clear();
        for d in &mut body.found {
            d.provenance.timestamp.clear();
        }
        sha256_hex(&serde_json::to_vec(&body).expect("serializable"))
    }

    pub fn seal(&mut self) {
        self.digest = self.body_digest();
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<SearchDocument, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
    }
}
