//! Plot-data tables derived from result records.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;
use spinflip_core::stats::{clopper_pearson, time_to_solution, DEFAULT_ALPHA};

use crate::config::Solver;
use crate::error::{BenchError, Result};
use crate::records::ResultRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportMode {
    SuccessVsN,
    TtsScatter,
    SuccessVsRatio,
}

impl ReportMode {
    pub const ALL: [ReportMode; 3] = [ReportMode::SuccessVsN, ReportMode::TtsScatter, ReportMode::SuccessVsRatio];

    pub fn as_str(&self) -> &'static str {
        match self {
            ReportMode::SuccessVsN => "success_vs_n",
            ReportMode::TtsScatter => "tts_scatter",
            ReportMode::SuccessVsRatio => "success_vs_ratio",
        }
    }
}

impl fmt::Display for ReportMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ReportMode {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        ReportMode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| BenchError::Report(format!("unknown report mode {s:?}")))
    }
}

/// Success statistics of one method, pooled over realizations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pooled {
    pub realizations: usize,
    pub repetitions: u64,
    /// `None` when any record is analytic.
    pub successes: Option<u64>,
    /// Mean of the per-realization success probabilities.
    pub p_s: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Pools records of one method. Sampled records get a Clopper-Pearson
/// interval on the summed counts; analytic ones report the range of `p_s`.
pub fn pool(records: &[&ResultRecord]) -> Result<Pooled> {
    if records.is_empty() {
        return Err(BenchError::Report("nothing to pool".into()));
    }
    let p_s = records.iter().map(|r| r.p_s).sum::<f64>() / records.len() as f64;
    let repetitions = records.iter().map(|r| r.r).sum();
    let successes: Option<u64> = records.iter().map(|r| r.successes).sum();
    let (ci_low, ci_high) = match successes {
        Some(k) => clopper_pearson(k, repetitions, DEFAULT_ALPHA)?,
        None => (
            records.iter().map(|r| r.ci_low).fold(f64::INFINITY, f64::min),
            records.iter().map(|r| r.ci_high).fold(f64::NEG_INFINITY, f64::max),
        ),
    };
    Ok(Pooled { realizations: records.len(), repetitions, successes, p_s, ci_low, ci_high })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuccessRow {
    pub family: String,
    pub n: usize,
    pub method: Solver,
    #[serde(rename = "K")]
    pub k: u64,
    pub realizations: usize,
    #[serde(rename = "R")]
    pub r: u64,
    pub successes: Option<u64>,
    pub p_s: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub tts: f64,
}

/// One row per `(n, method)`; separate rows per step budget if several were run.
pub fn success_vs_n(records: &[ResultRecord]) -> Result<Vec<SuccessRow>> {
    let mut groups: BTreeMap<(&str, usize, Solver, u64), Vec<&ResultRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((&r.family, r.n, r.method, r.k)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((family, n, method, k), group)| {
            let p = pool(&group)?;
            Ok(SuccessRow {
                family: family.to_owned(),
                n,
                method,
                k,
                realizations: p.realizations,
                r: p.repetitions,
                successes: p.successes,
                p_s: p.p_s,
                ci_low: p.ci_low,
                ci_high: p.ci_high,
                tts: time_to_solution(p.p_s, k as f64)?.tts,
            })
        })
        .collect()
}

/// `(x, y)` method pairs plotted against each other.
pub const SCATTER_PAIRS: [(Solver, Solver); 2] = [(Solver::SA, Solver::SAM), (Solver::SAM, Solver::SAQ)];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScatterRow {
    pub x_method: Solver,
    pub y_method: Solver,
    pub family: String,
    pub n: usize,
    pub realization_index: u64,
    #[serde(rename = "K")]
    pub k: u64,
    pub x: f64,
    pub y: f64,
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
    /// `y < x`: the y method needs less time.
    pub below_diagonal: bool,
}

type CellKey<'a> = (&'a str, usize, u64, u64);

fn by_cell(records: &[ResultRecord], method: Solver) -> BTreeMap<CellKey<'_>, &ResultRecord> {
    records
        .iter()
        .filter(|r| r.method == method)
        .map(|r| ((r.family.as_str(), r.n, r.k, r.realization_index), r))
        .collect()
}

/// Pairs TTS values of two methods per realization.
pub fn scatter_pair(records: &[ResultRecord], x_method: Solver, y_method: Solver) -> Result<Vec<ScatterRow>> {
    let xs = by_cell(records, x_method);
    let ys = by_cell(records, y_method);
    if xs.is_empty() || ys.is_empty() {
        return Err(BenchError::Report(format!("no {x_method} / {y_method} records to pair")));
    }
    if xs.len() != ys.len() || xs.keys().zip(ys.keys()).any(|(a, b)| a != b) {
        return Err(BenchError::Report(format!(
            "mismatched method pair: {} {x_method} cells vs {} {y_method} cells",
            xs.len(),
            ys.len()
        )));
    }
    Ok(xs
        .values()
        .zip(ys.values())
        .map(|(a, b)| ScatterRow {
            x_method,
            y_method,
            family: a.family.clone(),
            n: a.n,
            realization_index: a.realization_index,
            k: a.k,
            x: a.tts,
            y: b.tts,
            x_lo: a.tts_ci_low,
            x_hi: a.tts_ci_high,
            y_lo: b.tts_ci_low,
            y_hi: b.tts_ci_high,
            below_diagonal: b.tts < a.tts,
        })
        .collect())
}

/// All standard pairs whose two methods are both present.
pub fn tts_scatter(records: &[ResultRecord]) -> Result<Vec<ScatterRow>> {
    let has = |m: Solver| records.iter().any(|r| r.method == m);
    let mut rows = Vec::new();
    for (x, y) in SCATTER_PAIRS {
        if has(x) && has(y) {
            rows.extend(scatter_pair(records, x, y)?);
        }
    }
    if rows.is_empty() {
        return Err(BenchError::Report("tts_scatter needs SA+SAM or SAM+SAQ records".into()));
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioRow {
    pub family: String,
    pub n: usize,
    pub ratio: f64,
    #[serde(rename = "K")]
    pub k: u64,
    pub method: Solver,
    pub realizations: usize,
    pub p_s: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub tts: f64,
    /// Uniform random search with a doubly degenerate ground state.
    pub bf_g2: f64,
}

/// `K (2N - K - 1) / (N (N - 1))`.
pub fn bf_two_minima(space: u64, k: u64) -> f64 {
    let (n, k) = (space as f64, k as f64);
    k * (2.0 * n - k - 1.0) / (n * (n - 1.0))
}

pub fn success_vs_ratio(records: &[ResultRecord]) -> Result<Vec<RatioRow>> {
    let mut groups: BTreeMap<(&str, usize, u64, Solver), Vec<&ResultRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((&r.family, r.n, r.k, r.method)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((family, n, k, method), group)| {
            let p = pool(&group)?;
            Ok(RatioRow {
                family: family.to_owned(),
                n,
                ratio: group[0].ratio,
                k,
                method,
                realizations: p.realizations,
                p_s: p.p_s,
                ci_low: p.ci_low,
                ci_high: p.ci_high,
                tts: time_to_solution(p.p_s, k as f64)?.tts,
                bf_g2: bf_two_minima(1u64 << n, k),
            })
        })
        .collect()
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))?;
    }
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| BenchError::io(path, e))
}

/// Writes the table for `mode` and returns its row count.
pub fn write_report(records: &[ResultRecord], mode: ReportMode, path: &Path) -> Result<usize> {
    if records.is_empty() {
        return Err(BenchError::Report("no records".into()));
    }
    match mode {
        ReportMode::SuccessVsN => {
            let rows = success_vs_n(records)?;
            write_csv(path, &rows)?;
            Ok(rows.len())
        }
        ReportMode::TtsScatter => {
            let rows = tts_scatter(records)?;
            write_csv(path, &rows)?;
            Ok(rows.len())
        }
        ReportMode::SuccessVsRatio => {
            let rows = success_vs_ratio(records)?;
            write_csv(path, &rows)?;
            Ok(rows.len())
        }
    }
}

/// Summary of a paired TTS comparison across realizations.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedComparison {
    pub pairs: usize,
    /// Pairs where both TTS values are infinite; left out of the median.
    pub undefined: usize,
    /// Median of `ln(y / x)`.
    pub median_log_ratio: f64,
    /// Distribution-free order-statistic interval for the median.
    pub median_ci: (f64, f64),
    /// Pairs with `y < x`.
    pub below: u64,
    pub fraction_below: f64,
    pub fraction_ci: (f64, f64),
}

/// 1-based rank `l` of the lower order statistic so that
/// `[x_(l), x_(m+1-l)]` covers the median with probability `>= 1 - alpha`,
/// or `None` when `m` is too small for any such interval.
pub fn median_ci_rank(m: usize, alpha: f64) -> Option<usize> {
    // P(B <= j) for B ~ Bin(m, 1/2), accumulated in log space.
    let ln_half_m = -(m as f64) * std::f64::consts::LN_2;
    let mut ln_term = ln_half_m;
    let mut cdf = ln_term.exp();
    let mut rank = None;
    for j in 0..m / 2 {
        // x_(j+1) is a valid lower bound while P(B <= j) <= alpha/2.
        if cdf > alpha / 2.0 {
            break;
        }
        rank = Some(j + 1);
        ln_term += ((m - j) as f64 / (j + 1) as f64).ln();
        cdf += ln_term.exp();
    }
    rank
}

pub fn paired_comparison(rows: &[ScatterRow], alpha: f64) -> Result<PairedComparison> {
    if rows.is_empty() {
        return Err(BenchError::Report("no pairs to compare".into()));
    }
    let mut logs: Vec<f64> = rows
        .iter()
        .filter(|r| r.x.is_finite() || r.y.is_finite())
        .map(|r| (r.y / r.x).ln())
        .collect();
    let undefined = rows.len() - logs.len();
    logs.sort_by(f64::total_cmp);
    let m = logs.len();
    let (median_log_ratio, median_ci) = if m == 0 {
        (f64::NAN, (f64::NEG_INFINITY, f64::INFINITY))
    } else {
        let median = if m % 2 == 1 { logs[m / 2] } else { 0.5 * (logs[m / 2 - 1] + logs[m / 2]) };
        let ci = match median_ci_rank(m, alpha) {
            Some(l) => (logs[l - 1], logs[m - l]),
            None => (f64::NEG_INFINITY, f64::INFINITY),
        };
        (median, ci)
    };
    let below = rows.iter().filter(|r| r.below_diagonal).count() as u64;
    let fraction_ci = clopper_pearson(below, rows.len() as u64, alpha)?;
    Ok(PairedComparison {
        pairs: rows.len(),
        undefined,
        median_log_ratio,
        median_ci,
        below,
        fraction_below: below as f64 / rows.len() as f64,
        fraction_ci,
    })
}
