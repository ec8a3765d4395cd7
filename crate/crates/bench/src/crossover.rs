//! Where the SA and SAM success curves cross as the step budget shrinks.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::config::Solver;
use crate::error::{BenchError, Result};
use crate::records::ResultRecord;
use crate::report::pool;

pub const MIN_RATIOS: usize = 4;
pub const NO_CROSSOVER: &str = "no crossover in sampled range";

type Cells<'a> = BTreeMap<(u64, Solver), Vec<&'a ResultRecord>>;

/// Pooled SA and SAM success at one sampled ratio.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioPoint {
    pub ratio: f64,
    #[serde(rename = "K")]
    pub k: u64,
    pub sa: f64,
    pub sa_ci: (f64, f64),
    pub sam: f64,
    pub sam_ci: (f64, f64),
}

impl RatioPoint {
    fn diff(&self) -> f64 {
        self.sa - self.sam
    }

    /// The two intervals are disjoint with the sign of `diff`.
    fn resolved(&self) -> bool {
        if self.sa > self.sam {
            self.sa_ci.0 > self.sam_ci.1
        } else {
            self.sam_ci.0 > self.sa_ci.1
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Crossing {
    pub lower: f64,
    pub upper: f64,
    /// Linear interpolation of `SA - SAM` between the bracketing ratios.
    pub estimate: f64,
    /// SA is ahead at `lower` and SAM at `upper`.
    pub sa_wins_below: bool,
    /// The intervals overlap at one of the bracketing ratios, so the crossing
    /// is not statistically resolved.
    pub ci_overlap: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossoverSummary {
    pub family: String,
    pub n: usize,
    pub points: Vec<RatioPoint>,
    pub crossings: Vec<Crossing>,
    pub message: String,
}

/// Sign changes of `SA - SAM` over points sorted by ratio. A point where the
/// curves tie is skipped so a touch is not reported twice.
pub fn find_crossings(points: &[RatioPoint]) -> Vec<Crossing> {
    let signed: Vec<&RatioPoint> = points.iter().filter(|p| p.diff() != 0.0).collect();
    signed
        .windows(2)
        .filter(|w| (w[0].diff() > 0.0) != (w[1].diff() > 0.0))
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            let t = a.diff() / (a.diff() - b.diff());
            Crossing {
                lower: a.ratio,
                upper: b.ratio,
                estimate: a.ratio + t * (b.ratio - a.ratio),
                sa_wins_below: a.diff() > 0.0,
                ci_overlap: !(a.resolved() && b.resolved()),
            }
        })
        .collect()
}

/// Crossover analysis per `(family, n)`.
pub fn crossover(records: &[ResultRecord]) -> Result<Vec<CrossoverSummary>> {
    let mut groups: BTreeMap<(&str, usize), Cells> = BTreeMap::new();
    for r in records.iter().filter(|r| matches!(r.method, Solver::SA | Solver::SAM)) {
        groups.entry((&r.family, r.n)).or_default().entry((r.k, r.method)).or_default().push(r);
    }
    if groups.is_empty() {
        return Err(BenchError::Report("crossover needs SA and SAM records".into()));
    }
    let mut out = Vec::new();
    for ((family, n), cells) in groups {
        let ks: BTreeSet<u64> = cells.keys().map(|&(k, _)| k).collect();
        let mut points = Vec::new();
        for k in ks {
            let (Some(sa), Some(sam)) = (cells.get(&(k, Solver::SA)), cells.get(&(k, Solver::SAM))) else {
                continue;
            };
            let (a, b) = (pool(sa)?, pool(sam)?);
            points.push(RatioPoint {
                ratio: sa[0].ratio,
                k,
                sa: a.p_s,
                sa_ci: (a.ci_low, a.ci_high),
                sam: b.p_s,
                sam_ci: (b.ci_low, b.ci_high),
            });
        }
        if points.len() < MIN_RATIOS {
            return Err(BenchError::Report(format!(
                "n = {n}: only {} ratios with both SA and SAM; need at least {MIN_RATIOS}",
                points.len()
            )));
        }
        let crossings = find_crossings(&points);
        let message = match crossings.as_slice() {
            [] => NO_CROSSOVER.to_owned(),
            [c] => format!("crossover in [{}, {}], interpolated at {:.4}", c.lower, c.upper, c.estimate),
            many => format!("{} crossings", many.len()),
        };
        out.push(CrossoverSummary { family: family.to_owned(), n, points, crossings, message });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::records::cell_id;

    fn rec(method: Solver, ratio: f64, p: f64) -> ResultRecord {
        let n = 10;
        let r = 10_000;
        let k = (ratio * 1024.0).round() as u64;
        let successes = (p * r as f64).round() as u64;
        let est = spinflip_core::stats::SuccessEstimate::from_counts(successes, r, k).unwrap();
        ResultRecord {
            cell: cell_id("synthetic", n, 0, k, method),
            family: "synthetic".into(),
            n,
            method,
            realization_index: 0,
            ratio,
            k,
            r,
            successes: Some(successes),
            best_successes: None,
            g: 1,
            p_s: est.p_s,
            ci_low: est.ci_low,
            ci_high: est.ci_high,
            tts: 0.0,
            tts_ci_low: 0.0,
            tts_ci_high: 0.0,
            wall_clock_seconds: None,
        }
    }

    const GRID: [f64; 7] = [1.0, 0.5, 0.25, 0.1, 0.05, 0.02, 0.01];

    fn curves(sa: impl Fn(f64) -> f64, sam: impl Fn(f64) -> f64) -> Vec<ResultRecord> {
        GRID.iter().flat_map(|&x| [rec(Solver::SA, x, sa(x)), rec(Solver::SAM, x, sam(x))]).collect()
    }

    #[test]
    fn synthetic_crossing_at_one_tenth() {
        // SAM linear in the ratio, meeting the flat SA curve at 0.1.
        let records = curves(|_| 0.35, |x| 0.3 + 0.5 * x);
        let s = crossover(&records).unwrap();
        assert_eq!(s.len(), 1);
        let c = &s[0].crossings;
        assert_eq!(c.len(), 1);
        assert!(c[0].lower <= 0.1 && 0.1 <= c[0].upper, "{c:?}");
        assert!(c[0].sa_wins_below);
        assert!((c[0].estimate - 0.1).abs() < 1e-3);
    }

    #[test]
    fn interpolation_between_grid_points() {
        // Difference changes from +0.1 at 0.05 to -0.3 at 0.1.
        let records = curves(|x| if x <= 0.05 { 0.5 } else { 0.4 }, |x| if x <= 0.05 { 0.4 } else { 0.7 });
        let c = &crossover(&records).unwrap()[0].crossings;
        assert_eq!(c.len(), 1);
        assert_eq!((c[0].lower, c[0].upper), (0.05, 0.1));
        assert!((c[0].estimate - 0.0625).abs() < 1e-12);
        assert!(!c[0].ci_overlap);
    }

    #[test]
    fn sa_always_ahead_means_no_crossover() {
        let records = curves(|x| 0.5 + 0.4 * x, |x| 0.3 + 0.4 * x);
        let s = crossover(&records).unwrap();
        assert!(s[0].crossings.is_empty());
        assert_eq!(s[0].message, NO_CROSSOVER);
    }

    #[test]
    fn close_curves_flag_overlap() {
        let records = curves(|x| 0.5 + 0.001 * (0.1 - x), |_| 0.5);
        let c = &crossover(&records).unwrap()[0].crossings;
        assert_eq!(c.len(), 1);
        assert!(c[0].ci_overlap);
    }

    #[test]
    fn too_few_ratios_is_an_error() {
        let records: Vec<_> = curves(|_| 0.5, |_| 0.4).into_iter().filter(|r| r.ratio >= 0.25).collect();
        assert!(matches!(crossover(&records), Err(BenchError::Report(_))));
    }
}
