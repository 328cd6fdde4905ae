//! JSON forms of process matrices and measurement records. Complex numbers
//! are `[re, im]` pairs and matrices are row-major.

use std::fs;
use std::path::Path;

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use super::design::{recipe_name, INPUT_NAMES};
use super::process::{MeasurementRecord, ProcessTomography, RecordData};
use super::{Mat9, ProcessMatrix, ReducedProcessMatrix, TomographyError};
use crate::qutrit::{BASIS9_NAMES, C64, LOGICAL4_NAMES};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub basis: Vec<String>,
    pub chi: Vec<Vec<[f64; 2]>>,
}

fn rows<const R: usize, S>(m: &nalgebra::Matrix<C64, nalgebra::Const<R>, nalgebra::Const<R>, S>) -> Vec<Vec<[f64; 2]>>
where
    S: nalgebra::RawStorage<C64, nalgebra::Const<R>, nalgebra::Const<R>>,
{
    (0..R)
        .map(|i| (0..R).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

fn parse_square(json: &ChiJson, names: &[&str]) -> Result<Vec<C64>, TomographyError> {
    let n = names.len();
    if json.basis.len() != n || json.basis.iter().zip(names).any(|(a, b)| a != b) {
        return Err(TomographyError::InvalidRecord(format!(
            "basis must be {names:?}, found {:?}",
            json.basis
        )));
    }
    if json.chi.len() != n || json.chi.iter().any(|r| r.len() != n) {
        return Err(TomographyError::InvalidRecord(format!("chi must be {n}×{n}")));
    }
    Ok(json.chi.iter().flatten().map(|z| C64::new(z[0], z[1])).collect())
}

impl ChiJson {
    pub fn from_full(chi: &ProcessMatrix, label: Option<String>) -> Self {
        Self {
            label,
            basis: BASIS9_NAMES.iter().map(|s| s.to_string()).collect(),
            chi: rows(chi.chi()),
        }
    }

    pub fn from_reduced(chi: &ReducedProcessMatrix, label: Option<String>) -> Self {
        Self {
            label,
            basis: LOGICAL4_NAMES.iter().map(|s| s.to_string()).collect(),
            chi: rows(chi.chi()),
        }
    }

    pub fn to_full(&self) -> Result<ProcessMatrix, TomographyError> {
        let v = parse_square(self, &BASIS9_NAMES)?;
        Ok(ProcessMatrix::new(Mat9::from_row_slice(&v)))
    }

    pub fn to_reduced(&self) -> Result<ReducedProcessMatrix, TomographyError> {
        let v = parse_square(self, &LOGICAL4_NAMES)?;
        Ok(ReducedProcessMatrix::new(Matrix4::from_row_slice(&v)))
    }
}

/// Serialized measurement record. Exactly one of `probabilities` and
/// `counts` is present, indexed `[input][setting][outcome]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordJson {
    pub basis: Vec<String>,
    pub inputs: Vec<String>,
    pub settings: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probabilities: Option<Vec<Vec<[f64; 3]>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counts: Option<Vec<Vec<[u64; 3]>>>,
}

impl RecordJson {
    pub fn from_record(record: &MeasurementRecord, tomo: &ProcessTomography) -> Self {
        let (probabilities, counts) = match &record.data {
            RecordData::Probabilities(p) => (Some(p.clone()), None),
            RecordData::Counts(n) => (None, Some(n.clone())),
        };
        Self {
            basis: BASIS9_NAMES.iter().map(|s| s.to_string()).collect(),
            inputs: INPUT_NAMES.iter().map(|s| s.to_string()).collect(),
            settings: tomo.settings().recipes().iter().map(|r| recipe_name(r)).collect(),
            shots: record.shots,
            seed: record.seed,
            probabilities,
            counts,
        }
    }

    /// Checks names and shape against `tomo` and returns the record.
    pub fn to_record(&self, tomo: &ProcessTomography) -> Result<MeasurementRecord, TomographyError> {
        let bad = |m: String| TomographyError::InvalidRecord(m);
        if self.basis.iter().map(String::as_str).ne(BASIS9_NAMES) {
            return Err(bad(format!("unexpected basis {:?}", self.basis)));
        }
        if self.inputs.iter().map(String::as_str).ne(INPUT_NAMES) {
            return Err(bad(format!("unexpected inputs {:?}", self.inputs)));
        }
        let expected: Vec<String> = tomo.settings().recipes().iter().map(|r| recipe_name(r)).collect();
        if self.settings != expected {
            return Err(bad(format!("unexpected settings {:?}", self.settings)));
        }
        let data = match (&self.probabilities, &self.counts) {
            (Some(p), None) => RecordData::Probabilities(p.clone()),
            (None, Some(n)) => RecordData::Counts(n.clone()),
            _ => return Err(bad("exactly one of probabilities and counts is required".into())),
        };
        let record = MeasurementRecord {
            data,
            shots: self.shots,
            seed: self.seed,
        };
        record.validate(INPUT_NAMES.len(), expected.len())?;
        Ok(record)
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> std::io::Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
    fs::write(path, text + "\n")
}

pub fn read_record(path: &Path, tomo: &ProcessTomography) -> Result<MeasurementRecord, TomographyError> {
    let text = fs::read_to_string(path)
        .map_err(|e| TomographyError::InvalidRecord(format!("{}: {e}", path.display())))?;
    let json: RecordJson = serde_json::from_str(&text)
        .map_err(|e| TomographyError::InvalidRecord(format!("{}: {e}", path.display())))?;
    json.to_record(tomo)
}
