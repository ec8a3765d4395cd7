use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::Solver;
use crate::error::{BenchError, Result};

/// Aggregated outcome of one `(n, realization, K, method)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    /// Stable key used to resume interrupted runs.
    pub cell: String,
    pub family: String,
    pub n: usize,
    pub method: Solver,
    pub realization_index: u64,
    pub ratio: f64,
    #[serde(rename = "K")]
    pub k: u64,
    #[serde(rename = "R")]
    pub r: u64,
    /// Absent for analytic (BF) records.
    pub successes: Option<u64>,
    /// Runs whose best visited state was a ground state (diagnostic).
    pub best_successes: Option<u64>,
    /// Ground-state degeneracy of the instance.
    pub g: usize,
    pub p_s: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    #[serde(with = "inf_as_null")]
    pub tts: f64,
    #[serde(with = "inf_as_null")]
    pub tts_ci_low: f64,
    #[serde(with = "inf_as_null")]
    pub tts_ci_high: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_clock_seconds: Option<f64>,
}

impl ResultRecord {
    pub fn to_line(&self) -> Result<String> {
        let mut line = serde_json::to_string(self)?;
        line.push('\n');
        Ok(line)
    }
}

pub fn cell_id(family: &str, n: usize, realization: u64, k: u64, method: Solver) -> String {
    format!("{family}/n{n}/r{realization}/K{k}/{method}")
}

/// Infinite times to solution are written as JSON `null`.
mod inf_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

/// Reads every complete record. A trailing line without a newline (an
/// interrupted write) is ignored.
pub fn read_records(path: &Path) -> Result<Vec<ResultRecord>> {
    let file = match fs::File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(BenchError::MissingInput { path: path.to_owned() })
        }
        Err(e) => return Err(BenchError::io(path, e)),
    };
    let mut reader = BufReader::new(file);
    let mut records = Vec::new();
    let mut line = String::new();
    loop {
        line.clear();
        let read = reader.read_line(&mut line).map_err(|e| BenchError::io(path, e))?;
        if read == 0 || !line.ends_with('\n') {
            break;
        }
        if line.trim().is_empty() {
            continue;
        }
        records.push(serde_json::from_str(&line)?);
    }
    Ok(records)
}

/// Length in bytes of the prefix of `bytes` made of complete lines.
pub fn complete_prefix_len(bytes: &[u8]) -> usize {
    bytes.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1)
}
