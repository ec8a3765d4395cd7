use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use spinflip_core::anneal::Method;
use spinflip_core::generators::Family;
use spinflip_core::oracle::DEFAULT_CAP;

use crate::error::{BenchError, Result};

/// Relative annealing times `K/N` used for reduced-time sweeps.
pub const DEFAULT_RATIOS: [f64; 7] = [1.0, 0.5, 0.25, 0.1, 0.05, 0.02, 0.01];

/// A solver column in an experiment: one of the annealers or uniform random
/// search evaluated analytically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Solver {
    SA,
    SAM,
    SAQ,
    BF,
}

impl Solver {
    pub fn anneal_method(&self) -> Option<Method> {
        match self {
            Solver::SA => Some(Method::SA),
            Solver::SAM => Some(Method::SAM),
            Solver::SAQ => Some(Method::SAQ),
            Solver::BF => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Solver::SA => "SA",
            Solver::SAM => "SAM",
            Solver::SAQ => "SAQ",
            Solver::BF => "BF",
        }
    }
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Solver {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "SA" => Ok(Solver::SA),
            "SAM" => Ok(Solver::SAM),
            "SAQ" => Ok(Solver::SAQ),
            "BF" => Ok(Solver::BF),
            other => Err(BenchError::Config(format!("unknown method {other:?}"))),
        }
    }
}

/// Everything that defines an experiment sweep. Mirrors the JSON config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub family: Family,
    #[serde(default = "default_n_values")]
    pub n_values: Vec<usize>,
    #[serde(default = "default_methods")]
    pub methods: Vec<Solver>,
    #[serde(default = "one")]
    pub realizations: u64,
    /// Repetitions `R` per spin count.
    #[serde(default = "default_repetitions")]
    pub repetitions: BTreeMap<usize, u64>,
    /// Step budgets as fractions of the state-space size, `K = round(ratio 2^n)`.
    #[serde(default = "default_ratios")]
    pub ratios: Vec<f64>,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

fn default_n_values() -> Vec<usize> {
    vec![4, 8, 12, 16]
}

fn default_methods() -> Vec<Solver> {
    vec![Solver::SA, Solver::SAM]
}

fn one() -> u64 {
    1
}

fn default_ratios() -> Vec<f64> {
    vec![1.0]
}

/// `4 -> 10000, 8 -> 1000, 12 -> 1000, 16 -> 100`.
pub fn default_repetitions() -> BTreeMap<usize, u64> {
    BTreeMap::from([(4, 10_000), (8, 1000), (12, 1000), (16, 100)])
}

impl ExperimentConfig {
    pub fn new(family: Family) -> Self {
        ExperimentConfig {
            family,
            n_values: default_n_values(),
            methods: default_methods(),
            realizations: 1,
            repetitions: default_repetitions(),
            ratios: default_ratios(),
            master_seed: 0,
            out_dir: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_values.is_empty() {
            return Err(BenchError::Config("n_values is empty".into()));
        }
        if self.methods.is_empty() {
            return Err(BenchError::Config("methods is empty".into()));
        }
        if self.realizations == 0 {
            return Err(BenchError::Config("realizations must be at least 1".into()));
        }
        if self.ratios.is_empty() {
            return Err(BenchError::Config("ratios is empty".into()));
        }
        for &n in &self.n_values {
            self.family.check_size(n)?;
            if n > DEFAULT_CAP {
                return Err(BenchError::Config(format!("n = {n} exceeds the enumeration cap {DEFAULT_CAP}")));
            }
            match self.repetitions.get(&n) {
                None => return Err(BenchError::Config(format!("no repetition count for n = {n}"))),
                Some(0) => return Err(BenchError::Config(format!("repetition count for n = {n} is zero"))),
                Some(_) => {}
            }
            for &ratio in &self.ratios {
                if !(ratio > 0.0 && ratio <= 1.0) {
                    return Err(BenchError::Config(format!("ratio {ratio} outside (0, 1]")));
                }
                if steps_for(n, ratio) == 0 {
                    return Err(BenchError::Config(format!("ratio {ratio} gives zero steps at n = {n}")));
                }
            }
        }
        Ok(())
    }

    pub fn repetitions_for(&self, n: usize) -> u64 {
        self.repetitions[&n]
    }

    /// Number of records a complete run produces.
    pub fn cell_count(&self) -> usize {
        self.n_values.len() * self.methods.len() * self.realizations as usize * self.ratios.len()
    }
}

/// `K = round(ratio 2^n)`.
pub fn steps_for(n: usize, ratio: f64) -> u64 {
    ((1u64 << n) as f64 * ratio).round() as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_config_with_defaults() {
        let c = ExperimentConfig::from_json(r#"{"family":{"kind":"false_minimum","epsilon":0.1}}"#).unwrap();
        assert_eq!(c.n_values, vec![4, 8, 12, 16]);
        assert_eq!(c.repetitions_for(4), 10_000);
        assert_eq!(c.repetitions_for(16), 100);
        assert_eq!(c.methods, vec![Solver::SA, Solver::SAM]);
        assert_eq!(c.cell_count(), 8);
    }

    #[test]
    fn parses_full_config() {
        let c = ExperimentConfig::from_json(
            r#"{"family":{"kind":"gaussian_spin_glass"},"n_values":[12],"methods":["SA","SAM","SAQ","BF"],
                "realizations":100,"repetitions":{"12":1000},"ratios":[1.0,0.1,0.01],"master_seed":7}"#,
        )
        .unwrap();
        assert_eq!(c.methods.len(), 4);
        assert_eq!(c.cell_count(), 4 * 100 * 3);
        assert_eq!(steps_for(12, 0.1), 410);
        assert_eq!(steps_for(12, 0.01), 41);
    }

    #[test]
    fn rejects_invalid_configs() {
        let bad = [
            r#"{"family":{"kind":"false_minimum","epsilon":0.1},"n_values":[6],"repetitions":{"6":10}}"#,
            r#"{"family":{"kind":"zero_coupling"},"n_values":[5]}"#,
            r#"{"family":{"kind":"zero_coupling"},"n_values":[4],"ratios":[1.5]}"#,
            r#"{"family":{"kind":"zero_coupling"},"n_values":[4],"ratios":[0.01]}"#,
            r#"{"family":{"kind":"zero_coupling"},"n_values":[4],"realizations":0}"#,
            r#"{"family":{"kind":"zero_coupling"},"n_values":[4],"methods":[]}"#,
            r#"{"family":{"kind":"zero_coupling"},"n_values":[30],"repetitions":{"30":1}}"#,
            r#"{"family":{"kind":"nope"}}"#,
        ];
        for text in bad {
            assert!(ExperimentConfig::from_json(text).is_err(), "{text}");
        }
    }

    #[test]
    fn solver_names() {
        assert_eq!("bf".parse::<Solver>().unwrap(), Solver::BF);
        assert_eq!(Solver::SAQ.anneal_method(), Some(Method::SAQ));
        assert!(Solver::BF.anneal_method().is_none());
        assert!("XX".parse::<Solver>().is_err());
    }
}
