//! Instance generation and the repetition runner.
//!
//! Every repetition has its own random stream, seeded from
//! `(master_seed, family, n, realization, repetition, method, K)`, so results
//! do not depend on the number of workers or on execution order. Records are
//! appended in a fixed cell order and flushed as each cell finishes; a rerun
//! with `resume` skips the cells already on disk and produces the same file.

use std::collections::HashSet;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use spinflip_core::anneal::{anneal_from_random, AnnealParams, Method};
use spinflip_core::generators::GeneratorSeed;
use spinflip_core::ising::IsingModel;
use spinflip_core::oracle::{bf_success_probability, brute_force_minima, MinimaSet};
use spinflip_core::rng::{mix, tag_hash};
use spinflip_core::stats::{time_to_solution, SuccessEstimate, TtsBasis};

use crate::config::{steps_for, ExperimentConfig};
use crate::error::{BenchError, Result};
use crate::records::{cell_id, complete_prefix_len, read_records, ResultRecord};
use crate::store;

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub workers: usize,
    pub resume: bool,
    /// Record wall-clock seconds per cell. Makes the output machine-dependent.
    pub timing: bool,
    pub progress: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { workers: 1, resume: false, timing: false, progress: false }
    }
}

/// Writes every problem instance and its ground-state set. Returns the
/// problem file paths in generation order.
pub fn generate(config: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>> {
    config.validate()?;
    let tag = config.family.tag();
    let mut written = Vec::new();
    for &n in &config.n_values {
        for r in 0..config.realizations {
            let model = config.family.generate(n, GeneratorSeed::new(config.master_seed, r))?;
            let minima = brute_force_minima(&model)?;
            let path = store::problem_path(out, tag, n, r);
            store::write_problem(&path, &model)?;
            store::write_minima(&store::minima_path(out, tag, n, r), &minima)?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Seed of one repetition's random stream.
pub fn repetition_seed(config: &ExperimentConfig, n: usize, realization: u64, rep: u64, method: Method, k: u64) -> u64 {
    mix(&[
        config.master_seed,
        tag_hash("anneal"),
        tag_hash(config.family.tag()),
        n as u64,
        realization,
        rep,
        tag_hash(method.as_str()),
        k,
    ])
}

/// Runs all repetitions of one annealing cell; returns
/// `(successes, best-state successes)`.
pub fn run_cell(
    config: &ExperimentConfig,
    model: &IsingModel,
    minima: &MinimaSet,
    realization: u64,
    method: Method,
    k: u64,
    repetitions: u64,
) -> Result<(u64, u64)> {
    let n = model.n();
    (0..repetitions)
        .into_par_iter()
        .map(|rep| {
            let params = AnnealParams::new(method, k, repetition_seed(config, n, realization, rep, method, k));
            let mut outcome = anneal_from_random(model, &params)?;
            outcome.mark(minima)?;
            Ok((u64::from(outcome.success), u64::from(outcome.best_success)))
        })
        .try_reduce(|| (0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))
}

fn anneal_record(
    base: ResultRecord,
    successes: u64,
    best_successes: u64,
) -> Result<ResultRecord> {
    let est = SuccessEstimate::from_counts(successes, base.r, base.k)?;
    let (tts_ci_low, tts_ci_high) = est.tts_interval()?;
    Ok(ResultRecord {
        successes: Some(successes),
        best_successes: Some(best_successes),
        p_s: est.p_s,
        ci_low: est.ci_low,
        ci_high: est.ci_high,
        tts: est.tts(TtsBasis::Point)?.tts,
        tts_ci_low,
        tts_ci_high,
        ..base
    })
}

fn bf_record(base: ResultRecord) -> Result<ResultRecord> {
    let p = bf_success_probability(1u64 << base.n, base.k, base.g as u64)?;
    let tts = time_to_solution(p, base.k as f64)?.tts;
    Ok(ResultRecord { p_s: p, ci_low: p, ci_high: p, tts, tts_ci_low: tts, tts_ci_high: tts, ..base })
}

struct Instance {
    model: IsingModel,
    minima: MinimaSet,
}

fn load_instance(out: &Path, family: &str, n: usize, realization: u64) -> Result<Instance> {
    let model = store::read_problem(&store::problem_path(out, family, n, realization))?;
    let minima = store::read_minima(&store::minima_path(out, family, n, realization))?;
    if model.n() != n || minima.n != n {
        return Err(BenchError::Config(format!("stored instance for n = {n}, r = {realization} has the wrong size")));
    }
    Ok(Instance { model, minima })
}

/// Executes every cell of the sweep and returns all records in file order.
pub fn run(config: &ExperimentConfig, out: &Path, opts: &RunOptions) -> Result<Vec<ResultRecord>> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(opts.workers.max(1)).build()?;
    let path = store::results_path(out);
    fs::create_dir_all(out).map_err(|e| BenchError::io(out, e))?;

    let mut records = Vec::new();
    if opts.resume && path.exists() {
        let bytes = fs::read(&path).map_err(|e| BenchError::io(&path, e))?;
        let keep = complete_prefix_len(&bytes);
        if keep < bytes.len() {
            let f = OpenOptions::new().write(true).open(&path).map_err(|e| BenchError::io(&path, e))?;
            f.set_len(keep as u64).map_err(|e| BenchError::io(&path, e))?;
        }
        records = read_records(&path)?;
    } else {
        fs::write(&path, b"").map_err(|e| BenchError::io(&path, e))?;
    }
    let done: HashSet<String> = records.iter().map(|r| r.cell.clone()).collect();
    let mut file = OpenOptions::new().append(true).open(&path).map_err(|e| BenchError::io(&path, e))?;

    let family = config.family.tag();
    for &n in &config.n_values {
        let repetitions = config.repetitions_for(n);
        for realization in 0..config.realizations {
            let mut instance = None;
            for &ratio in &config.ratios {
                let k = steps_for(n, ratio);
                for &solver in &config.methods {
                    let cell = cell_id(family, n, realization, k, solver);
                    if done.contains(&cell) {
                        continue;
                    }
                    if instance.is_none() {
                        instance = Some(load_instance(out, family, n, realization)?);
                    }
                    let inst = instance.as_ref().expect("loaded above");
                    let started = Instant::now();
                    let base = ResultRecord {
                        cell,
                        family: family.to_owned(),
                        n,
                        method: solver,
                        realization_index: realization,
                        ratio,
                        k,
                        r: repetitions,
                        successes: None,
                        best_successes: None,
                        g: inst.minima.g,
                        p_s: 0.0,
                        ci_low: 0.0,
                        ci_high: 0.0,
                        tts: 0.0,
                        tts_ci_low: 0.0,
                        tts_ci_high: 0.0,
                        wall_clock_seconds: None,
                    };
                    let mut record = match solver.anneal_method() {
                        Some(method) => {
                            let (hits, best) = pool.install(|| {
                                run_cell(config, &inst.model, &inst.minima, realization, method, k, repetitions)
                            })?;
                            anneal_record(base, hits, best)?
                        }
                        None => bf_record(base)?,
                    };
                    if opts.timing {
                        record.wall_clock_seconds = Some(started.elapsed().as_secs_f64());
                    }
                    if opts.progress {
                        eprintln!("{}  p_s={:.4} [{:.4}, {:.4}]", record.cell, record.p_s, record.ci_low, record.ci_high);
                    }
                    file.write_all(record.to_line()?.as_bytes()).map_err(|e| BenchError::io(&path, e))?;
                    file.flush().map_err(|e| BenchError::io(&path, e))?;
                    records.push(record);
                }
            }
        }
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Solver;
    use spinflip_core::generators::Family;
    use std::collections::BTreeMap;

    fn small(family: Family) -> ExperimentConfig {
        ExperimentConfig {
            n_values: vec![4],
            methods: vec![Solver::SA, Solver::BF],
            repetitions: BTreeMap::from([(4, 50)]),
            ..ExperimentConfig::new(family)
        }
    }

    #[test]
    fn run_requires_generated_inputs() {
        let dir = tempfile::tempdir().unwrap();
        let err = run(&small(Family::ZeroCoupling), dir.path(), &RunOptions::default()).unwrap_err();
        assert!(matches!(err, BenchError::MissingInput { .. }));
    }

    #[test]
    fn bf_records_are_analytic() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = small(Family::UniformSpinGlass);
        config.ratios = vec![1.0, 0.25];
        generate(&config, dir.path()).unwrap();
        let records = run(&config, dir.path(), &RunOptions::default()).unwrap();
        assert_eq!(records.len(), 4);
        let bf: Vec<_> = records.iter().filter(|r| r.method == Solver::BF).collect();
        assert_eq!(bf[0].p_s, 1.0);
        assert_eq!(bf[0].successes, None);
        let expected = bf_success_probability(16, 4, bf[1].g as u64).unwrap();
        assert_eq!(bf[1].p_s, expected);
        assert_eq!((bf[1].ci_low, bf[1].ci_high), (expected, expected));
    }

    #[test]
    fn timing_is_opt_in() {
        let dir = tempfile::tempdir().unwrap();
        let config = small(Family::ZeroCoupling);
        generate(&config, dir.path()).unwrap();
        let plain = run(&config, dir.path(), &RunOptions::default()).unwrap();
        assert!(plain.iter().all(|r| r.wall_clock_seconds.is_none()));
        let timed = run(&config, dir.path(), &RunOptions { timing: true, ..RunOptions::default() }).unwrap();
        assert!(timed.iter().all(|r| r.wall_clock_seconds.is_some()));
    }
}
