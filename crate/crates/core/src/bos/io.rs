//! Self-describing JSON containers for sensing matrices and vectors.
//!
//! Complex entries are stored row-major as `[re, im]` pairs so the files stay
//! readable from any language.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::sampling::{Provenance, SensingMatrix};
use super::BosError;
use crate::numerics::{CMatrix, CVector};

pub const MATRIX_FORMAT: &str = "cslab.sensing_matrix";
pub const VECTOR_FORMAT: &str = "cslab.vector";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct MatrixFile {
    format: String,
    version: u32,
    rows: usize,
    cols: usize,
    provenance: Provenance,
    entries: Vec<[f64; 2]>,
}

#[derive(Debug, Serialize, Deserialize)]
struct VectorFile {
    format: String,
    version: u32,
    len: usize,
    entries: Vec<[f64; 2]>,
}

fn pack(values: &[Complex64]) -> Vec<[f64; 2]> {
    values.iter().map(|z| [z.re, z.im]).collect()
}

fn unpack(values: &[[f64; 2]]) -> Vec<Complex64> {
    values.iter().map(|&[re, im]| Complex64::new(re, im)).collect()
}

fn check_header(format: &str, version: u32, want: &str) -> Result<(), BosError> {
    if format != want {
        return Err(BosError::Format(format!("expected format `{want}`, found `{format}`")));
    }
    if version != FORMAT_VERSION {
        return Err(BosError::Format(format!(
            "unsupported version {version} (expected {FORMAT_VERSION})"
        )));
    }
    Ok(())
}

pub fn matrix_to_json(a: &SensingMatrix) -> Result<String, BosError> {
    let file = MatrixFile {
        format: MATRIX_FORMAT.into(),
        version: FORMAT_VERSION,
        rows: a.rows(),
        cols: a.cols(),
        provenance: a.provenance().clone(),
        entries: pack(a.matrix().data()),
    };
    serde_json::to_string(&file).map_err(|e| BosError::Format(e.to_string()))
}

pub fn matrix_from_json(text: &str) -> Result<SensingMatrix, BosError> {
    let file: MatrixFile = serde_json::from_str(text).map_err(|e| BosError::Format(e.to_string()))?;
    check_header(&file.format, file.version, MATRIX_FORMAT)?;
    let matrix = CMatrix::from_row_major(file.rows, file.cols, unpack(&file.entries))?;
    Ok(SensingMatrix::from_parts(matrix, file.provenance))
}

pub fn vector_to_json(v: &[Complex64]) -> Result<String, BosError> {
    let file = VectorFile {
        format: VECTOR_FORMAT.into(),
        version: FORMAT_VERSION,
        len: v.len(),
        entries: pack(v),
    };
    serde_json::to_string(&file).map_err(|e| BosError::Format(e.to_string()))
}

pub fn vector_from_json(text: &str) -> Result<CVector, BosError> {
    let file: VectorFile = serde_json::from_str(text).map_err(|e| BosError::Format(e.to_string()))?;
    check_header(&file.format, file.version, VECTOR_FORMAT)?;
    if file.entries.len() != file.len {
        return Err(BosError::Format(format!(
            "declared length {} but found {} entries",
            file.len,
            file.entries.len()
        )));
    }
    let v = unpack(&file.entries);
    if let Some(i) = v.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(BosError::Format(format!("non-finite entry at position {i}")));
    }
    Ok(v)
}

pub fn write_matrix(path: impl AsRef<Path>, a: &SensingMatrix) -> Result<(), BosError> {
    fs::write(path, matrix_to_json(a)?)?;
    Ok(())
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<SensingMatrix, BosError> {
    matrix_from_json(&fs::read_to_string(path)?)
}

pub fn write_vector(path: impl AsRef<Path>, v: &[Complex64]) -> Result<(), BosError> {
    fs::write(path, vector_to_json(v)?)?;
    Ok(())
}

pub fn read_vector(path: impl AsRef<Path>) -> Result<CVector, BosError> {
    vector_from_json(&fs::read_to_string(path)?)
}
