//! On-disk layout of an experiment directory.
//!
//! ```text
//! <out>/problems/<family>_n<n>_r<realization>.json         problem instance
//! <out>/problems/<family>_n<n>_r<realization>.minima.json  cached ground states
//! <out>/results.jsonl                                      one record per cell
//! <out>/<mode>.csv, <out>/crossover.json                   reports
//! ```

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use spinflip_core::ising::IsingModel;
use spinflip_core::oracle::MinimaSet;

use crate::error::{BenchError, Result};

pub const RESULTS_FILE: &str = "results.jsonl";

pub fn problem_dir(out: &Path) -> PathBuf {
    out.join("problems")
}

fn stem(family: &str, n: usize, realization: u64) -> String {
    format!("{family}_n{n}_r{realization:03}")
}

pub fn problem_path(out: &Path, family: &str, n: usize, realization: u64) -> PathBuf {
    problem_dir(out).join(format!("{}.json", stem(family, n, realization)))
}

pub fn minima_path(out: &Path, family: &str, n: usize, realization: u64) -> PathBuf {
    problem_dir(out).join(format!("{}.minima.json", stem(family, n, realization)))
}

pub fn results_path(out: &Path) -> PathBuf {
    out.join(RESULTS_FILE)
}

/// Writes `contents` atomically (temp file + rename) so an interrupted
/// `generate` never leaves a truncated file behind.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))?;
    }
    let tmp = path.with_extension("tmp");
    let mut f = fs::File::create(&tmp).map_err(|e| BenchError::io(&tmp, e))?;
    f.write_all(contents).map_err(|e| BenchError::io(&tmp, e))?;
    f.sync_all().map_err(|e| BenchError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| BenchError::io(path, e))
}

fn read_input(path: &Path) -> Result<String> {
    match fs::read_to_string(path) {
        Ok(text) => Ok(text),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            Err(BenchError::MissingInput { path: path.to_owned() })
        }
        Err(e) => Err(BenchError::io(path, e)),
    }
}

pub fn write_problem(path: &Path, model: &IsingModel) -> Result<()> {
    let mut text = model.to_json()?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn read_problem(path: &Path) -> Result<IsingModel> {
    Ok(IsingModel::from_json(&read_input(path)?)?)
}

pub fn write_minima(path: &Path, minima: &MinimaSet) -> Result<()> {
    let mut text = serde_json::to_string(minima)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn read_minima(path: &Path) -> Result<MinimaSet> {
    Ok(serde_json::from_str(&read_input(path)?)?)
}
