//! Success-probability statistics.

use serde::{Deserialize, Serialize};

use crate::anneal::RunOutcome;
use crate::error::{Error, Result};

/// Target overall success probability for time to solution.
pub const TTS_TARGET: f64 = 0.99;

/// Significance level of the reported confidence intervals.
pub const DEFAULT_ALPHA: f64 = 0.05;

/// Absolute tolerance of the Clopper-Pearson bisection.
pub const CP_TOLERANCE: f64 = 1e-10;

/// Binomial(R, p) tail probabilities evaluated in log space.
struct Binomial {
    trials: u64,
    ln_fact: Vec<f64>,
}

impl Binomial {
    fn new(trials: u64) -> Self {
        let mut ln_fact = Vec::with_capacity(trials as usize + 1);
        ln_fact.push(0.0);
        let mut acc = 0.0;
        for i in 1..=trials {
            acc += (i as f64).ln();
            ln_fact.push(acc);
        }
        Binomial { trials, ln_fact }
    }

    fn ln_pmf(&self, j: u64, ln_p: f64, ln_q: f64) -> f64 {
        let r = self.trials as usize;
        let j_us = j as usize;
        self.ln_fact[r] - self.ln_fact[j_us] - self.ln_fact[r - j_us] + j as f64 * ln_p + (self.trials - j) as f64 * ln_q
    }

    /// `Σ_{j in range} P(X = j)` for `0 < p < 1`.
    fn sum(&self, range: std::ops::RangeInclusive<u64>, p: f64) -> f64 {
        let (ln_p, ln_q) = (p.ln(), (-p).ln_1p());
        let terms: Vec<f64> = range.map(|j| self.ln_pmf(j, ln_p, ln_q)).collect();
        let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return 0.0;
        }
        (max.exp() * terms.iter().map(|t| (t - max).exp()).sum::<f64>()).min(1.0)
    }

    fn upper_tail(&self, k: u64, p: f64) -> f64 {
        self.sum(k..=self.trials, p)
    }

    fn lower_tail(&self, k: u64, p: f64) -> f64 {
        self.sum(0..=k, p)
    }
}

/// Exact (Clopper-Pearson) `1 - alpha` interval for `k` successes in `r` trials.
///
/// The lower bound is the largest `p` with `P(Bin(r, p) >= k) <= alpha/2`
/// and the upper bound the smallest `p` with `P(Bin(r, p) <= k) <= alpha/2`,
/// both located by bisection on the exact tail sums.
pub fn clopper_pearson(k: u64, r: u64, alpha: f64) -> Result<(f64, f64)> {
    if r == 0 || k > r || !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param(format!("need 0 <= k <= R, R >= 1, 0 < alpha < 1; got k={k} R={r} alpha={alpha}")));
    }
    let dist = Binomial::new(r);
    let half = alpha / 2.0;

    let low = if k == 0 {
        0.0
    } else {
        let (mut lo, mut hi) = (0.0, 1.0);
        while hi - lo > CP_TOLERANCE {
            let mid = 0.5 * (lo + hi);
            if dist.upper_tail(k, mid) <= half {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    let high = if k == r {
        1.0
    } else {
        let (mut lo, mut hi) = (0.0, 1.0);
        while hi - lo > CP_TOLERANCE {
            let mid = 0.5 * (lo + hi);
            if dist.lower_tail(k, mid) <= half {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    };
    Ok((low, high))
}

/// Which point of the success interval a time to solution was computed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TtsBasis {
    Point,
    CiLow,
    CiHigh,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TtsResult {
    /// Expected cumulative annealing steps to reach the target; may be infinite.
    pub tts: f64,
    pub target: f64,
    pub basis: TtsBasis,
}

/// `t_a ln(1 - 0.99) / ln(1 - p_s)`: cumulative annealing time of independent
/// restarts needed for a 99% chance of at least one success.
///
/// Never less than one run: for `p_s >= 0.99` the result is `t_a`. Zero
/// success probability gives `+inf`.
pub fn time_to_solution(p_s: f64, t_a: f64) -> Result<TtsResult> {
    tts_with_basis(p_s, t_a, TtsBasis::Point)
}

pub fn tts_with_basis(p_s: f64, t_a: f64, basis: TtsBasis) -> Result<TtsResult> {
    if !(0.0..=1.0).contains(&p_s) {
        return Err(Error::param(format!("success probability {p_s} outside [0, 1]")));
    }
    if t_a.is_nan() || t_a <= 0.0 {
        return Err(Error::param(format!("annealing time must be positive, got {t_a}")));
    }
    let tts = if p_s == 0.0 {
        f64::INFINITY
    } else if p_s >= TTS_TARGET {
        t_a
    } else {
        t_a * (1.0 - TTS_TARGET).ln() / (-p_s).ln_1p()
    };
    Ok(TtsResult { tts, target: TTS_TARGET, basis })
}

/// Probability that at least one of `r` independent runs succeeds.
pub fn restart_success(p: f64, r: u64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) || r == 0 {
        return Err(Error::param(format!("need 0 <= p <= 1 and r >= 1, got p={p} r={r}")));
    }
    if r == 1 {
        return Ok(p);
    }
    Ok(-((r as f64) * (-p).ln_1p()).exp_m1())
}

/// Success count over `R` repetitions with its 95% Clopper-Pearson interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuccessEstimate {
    pub successes: u64,
    pub repetitions: u64,
    pub p_s: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Per-run step budget `K`.
    pub steps: u64,
}

impl SuccessEstimate {
    pub fn from_counts(successes: u64, repetitions: u64, steps: u64) -> Result<Self> {
        let (ci_low, ci_high) = clopper_pearson(successes, repetitions, DEFAULT_ALPHA)?;
        Ok(SuccessEstimate {
            successes,
            repetitions,
            p_s: successes as f64 / repetitions as f64,
            ci_low,
            ci_high,
            steps,
        })
    }

    pub fn tts(&self, basis: TtsBasis) -> Result<TtsResult> {
        let p = match basis {
            TtsBasis::Point => self.p_s,
            TtsBasis::CiLow => self.ci_low,
            TtsBasis::CiHigh => self.ci_high,
        };
        tts_with_basis(p, self.steps as f64, basis)
    }

    /// `(lower, upper)` time-to-solution bounds from the interval endpoints.
    /// TTS is monotone in `p_s`, so the upper success bound gives the lower
    /// time bound.
    pub fn tts_interval(&self) -> Result<(f64, f64)> {
        Ok((self.tts(TtsBasis::CiHigh)?.tts, self.tts(TtsBasis::CiLow)?.tts))
    }
}

pub fn estimate(outcomes: &[RunOutcome], steps: u64) -> Result<SuccessEstimate> {
    if outcomes.is_empty() {
        return Err(Error::param("cannot estimate success from zero runs"));
    }
    let successes = outcomes.iter().filter(|o| o.success).count() as u64;
    SuccessEstimate::from_counts(successes, outcomes.len() as u64, steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ising::SpinConfig;
    use rand::{Rng, SeedableRng};
    use statrs::distribution::{Beta, ContinuousCDF};

    fn outcome(success: bool) -> RunOutcome {
        RunOutcome {
            final_state: SpinConfig::all_up(2),
            final_energy: 0.0,
            best_state: SpinConfig::all_up(2),
            best_energy: 0.0,
            accepted_moves: 0,
            success,
            best_success: success,
        }
    }

    #[test]
    fn zero_successes_closed_form() {
        let (low, high) = clopper_pearson(0, 10, 0.05).unwrap();
        assert_eq!(low, 0.0);
        assert!((high - (1.0 - 0.025f64.powf(0.1))).abs() < 1e-9);
        assert!((high - 0.308_50).abs() < 1e-5);
    }

    #[test]
    fn all_successes_mirror() {
        for r in [1, 7, 10, 250] {
            let (low, high) = clopper_pearson(r, r, 0.05).unwrap();
            assert_eq!(high, 1.0);
            assert!((low - 0.025f64.powf(1.0 / r as f64)).abs() < 1e-9);
        }
    }

    #[test]
    fn matches_beta_quantiles() {
        // Clopper-Pearson bounds are Beta(k, R-k+1) and Beta(k+1, R-k) quantiles.
        for &(k, r) in &[(1u64, 10u64), (5, 10), (50, 100), (3, 1000), (997, 1000), (4321, 10_000)] {
            let (low, high) = clopper_pearson(k, r, 0.05).unwrap();
            let lo_ref = Beta::new(k as f64, (r - k + 1) as f64).unwrap().inverse_cdf(0.025);
            let hi_ref = Beta::new((k + 1) as f64, (r - k) as f64).unwrap().inverse_cdf(0.975);
            assert!((low - lo_ref).abs() < 1e-8, "k={k} R={r}: {low} vs {lo_ref}");
            assert!((high - hi_ref).abs() < 1e-8, "k={k} R={r}: {high} vs {hi_ref}");
        }
    }

    #[test]
    fn large_repetition_counts() {
        let (low, high) = clopper_pearson(50_000, 100_000, 0.05).unwrap();
        assert!(low < 0.5 && high > 0.5 && high - low < 0.01);
    }

    #[test]
    fn interval_narrows_with_alpha() {
        for k in [0, 3, 20, 37, 40] {
            let wide = clopper_pearson(k, 40, 0.01).unwrap();
            let narrow = clopper_pearson(k, 40, 0.2).unwrap();
            assert!(narrow.0 >= wide.0 && narrow.1 <= wide.1);
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(clopper_pearson(0, 0, 0.05).is_err());
        assert!(clopper_pearson(5, 4, 0.05).is_err());
        assert!(clopper_pearson(1, 4, 0.0).is_err());
        assert!(clopper_pearson(1, 4, 1.0).is_err());
    }

    #[test]
    fn coverage_at_p03() {
        let mut cache = std::collections::HashMap::new();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
        let trials = 10_000;
        let mut covered = 0;
        for _ in 0..trials {
            let k = (0..100).filter(|_| rng.random::<f64>() < 0.3).count() as u64;
            let (lo, hi) = *cache.entry(k).or_insert_with(|| clopper_pearson(k, 100, 0.05).unwrap());
            if lo <= 0.3 && 0.3 <= hi {
                covered += 1;
            }
        }
        assert!(covered as f64 / trials as f64 >= 0.945);
    }

    #[test]
    fn tts_values() {
        assert_eq!(time_to_solution(0.99, 1000.0).unwrap().tts, 1000.0);
        assert!((time_to_solution(0.5, 1000.0).unwrap().tts - 6_643.856_189_774_724).abs() < 1e-6);
        assert_eq!(time_to_solution(0.0, 1000.0).unwrap().tts, f64::INFINITY);
        assert_eq!(time_to_solution(1.0, 1000.0).unwrap().tts, 1000.0);
        assert!(time_to_solution(1.2, 10.0).is_err());
        assert!(time_to_solution(0.5, 0.0).is_err());
    }

    #[test]
    fn tts_monotone() {
        let mut prev = f64::INFINITY;
        for i in 1..=990 {
            let t = time_to_solution(i as f64 / 1000.0, 100.0).unwrap().tts;
            assert!(t < prev);
            assert!(t >= 100.0);
            prev = t;
        }
    }

    #[test]
    fn restarts() {
        assert_eq!(restart_success(0.37, 1).unwrap(), 0.37);
        assert!((restart_success(0.5, 2).unwrap() - 0.75).abs() < 1e-15);
        assert_eq!(restart_success(1.0, 3).unwrap(), 1.0);
        assert_eq!(restart_success(0.0, 3).unwrap(), 0.0);
        assert!(restart_success(0.5, 0).is_err());
        let mut prev = 0.0;
        for r in 1..50 {
            let p = restart_success(0.1, r).unwrap();
            assert!(p > prev);
            assert!((p - (1.0 - 0.9f64.powi(r as i32))).abs() < 1e-14);
            prev = p;
        }
    }

    #[test]
    fn estimates_from_outcomes() {
        let all: Vec<_> = (0..20).map(|_| outcome(true)).collect();
        let e = estimate(&all, 64).unwrap();
        assert_eq!((e.p_s, e.ci_high), (1.0, 1.0));
        let none: Vec<_> = (0..20).map(|_| outcome(false)).collect();
        let e = estimate(&none, 64).unwrap();
        assert_eq!((e.p_s, e.ci_low), (0.0, 0.0));
        assert_eq!(e.tts(TtsBasis::Point).unwrap().tts, f64::INFINITY);
        let half: Vec<_> = (0..100).map(|i| outcome(i % 2 == 0)).collect();
        let e = estimate(&half, 64).unwrap();
        assert_eq!((e.ci_low, e.ci_high), clopper_pearson(50, 100, 0.05).unwrap());
        assert!(e.ci_low < 0.5 && e.ci_high > 0.5);
        let (t_lo, t_hi) = e.tts_interval().unwrap();
        let t = e.tts(TtsBasis::Point).unwrap().tts;
        assert!(t_lo < t && t < t_hi);
        assert!(estimate(&[], 64).is_err());
    }
}
