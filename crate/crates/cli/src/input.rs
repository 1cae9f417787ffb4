//! Input documents: JSON state, settings, and table files. Complex
//! matrices travel as separate "re"/"im" nested arrays, row-major,
//! qubit 1 most significant.

use bellcheck::corrtensor::MeasurementSettings;
use bellcheck::qstate::{make_ghz, make_pure, mix_with_noise, product_state, DensityMatrix};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateSpec {
    pub n_qubits: usize,
    #[serde(flatten)]
    pub kind: StateKind,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StateKind {
    Ghz,
    Werner {
        v: f64,
    },
    Dense {
        re: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        im: Option<Vec<Vec<f64>>>,
    },
    Pure {
        re: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        im: Option<Vec<f64>>,
    },
    Product {
        bloch: Vec<[f64; 3]>,
    },
}

impl StateSpec {
    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            StateKind::Ghz => "ghz",
            StateKind::Werner { .. } => "werner",
            StateKind::Dense { .. } => "dense",
            StateKind::Pure { .. } => "pure",
            StateKind::Product { .. } => "product",
        }
    }

    pub fn werner_weight(&self) -> Option<f64> {
        match self.kind {
            StateKind::Werner { v } => Some(v),
            _ => None,
        }
    }

    pub fn to_density(&self) -> Result<DensityMatrix, CliError> {
        let n = self.n_qubits;
        let dim = 1usize
            .checked_shl(n as u32)
            .filter(|_| n <= 16)
            .ok_or_else(|| CliError::input(format!("n_qubits {n} out of range")))?;
        match &self.kind {
            StateKind::Ghz => Ok(make_ghz(n)?.density()),
            StateKind::Werner { v } => Ok(mix_with_noise(&make_ghz(n)?.density(), *v)?),
            StateKind::Dense { re, im } => {
                check_square(re, dim, "re")?;
                if let Some(im) = im {
                    check_square(im, dim, "im")?;
                }
                let mat = DMatrix::from_fn(dim, dim, |i, j| {
                    C64::new(re[i][j], im.as_ref().map_or(0.0, |m| m[i][j]))
                });
                Ok(DensityMatrix::from_matrix(mat)?)
            }
            StateKind::Pure { re, im } => {
                check_length(re.len(), dim, "re")?;
                if let Some(im) = im {
                    check_length(im.len(), dim, "im")?;
                }
                let amps: Vec<C64> = (0..dim)
                    .map(|i| C64::new(re[i], im.as_ref().map_or(0.0, |v| v[i])))
                    .collect();
                Ok(make_pure(amps)?)
            }
            StateKind::Product { bloch } => {
                check_length(bloch.len(), n, "bloch")?;
                Ok(product_state(bloch)?)
            }
        }
    }
}

fn check_square(rows: &[Vec<f64>], dim: usize, field: &str) -> Result<(), CliError> {
    if rows.len() != dim {
        return Err(CliError::input(format!(
            "field \"{field}\": expected {dim} rows, found {}",
            rows.len()
        )));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != dim {
            return Err(CliError::input(format!(
                "field \"{field}\", row {i}: expected {dim} entries, found {}",
                row.len()
            )));
        }
    }
    Ok(())
}

fn check_length(found: usize, expected: usize, field: &str) -> Result<(), CliError> {
    if found != expected {
        return Err(CliError::input(format!(
            "field \"{field}\": expected {expected} entries, found {found}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SettingsSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_qubits: Option<usize>,
    pub directions: Vec<[[f64; 3]; 2]>,
}

impl SettingsSpec {
    pub fn to_settings(&self, n_qubits: usize) -> Result<MeasurementSettings, CliError> {
        if let Some(n) = self.n_qubits {
            if n != n_qubits {
                return Err(CliError::input(format!(
                    "settings file declares {n} qubits, state has {n_qubits}"
                )));
            }
        }
        check_length(self.directions.len(), n_qubits, "directions")?;
        Ok(MeasurementSettings::from_directions(
            self.directions.clone(),
        )?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableSpec {
    pub n_qubits: usize,
    pub entries: Vec<f64>,
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path, what: &str) -> Result<T, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read {what} {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::input(format!("malformed {what} {}: {e}", path.display())))
}
