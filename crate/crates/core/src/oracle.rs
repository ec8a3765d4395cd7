//! Exhaustive ground truth for small instances.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ising::{IsingModel, SpinConfig};

/// Largest spin count enumerated unless a caller raises the cap.
pub const DEFAULT_CAP: usize = 24;

/// Relative tolerance for minima membership on real-valued models.
pub const MINIMA_RTOL: f64 = 1e-12;

/// The exact set of global minima, as sorted state labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimaSet {
    pub n: usize,
    pub min_energy: f64,
    pub minima: Vec<u64>,
    pub g: usize,
}

impl MinimaSet {
    pub fn contains_label(&self, label: u64) -> bool {
        self.minima.binary_search(&label).is_ok()
    }

    pub fn contains(&self, s: &SpinConfig) -> Result<bool> {
        if s.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, actual: s.len() });
        }
        Ok(self.contains_label(s.encode()?))
    }

    pub fn degeneracy(&self) -> usize {
        self.g
    }

    /// State-space size `N = 2^n`.
    pub fn space_size(&self) -> u64 {
        1u64 << self.n
    }
}

fn check_cap(model: &IsingModel, cap: usize) -> Result<()> {
    let cap = cap.min(63);
    if model.n() > cap {
        return Err(Error::Capacity { n: model.n(), cap });
    }
    Ok(())
}

/// Visits every state in Gray-code order with an incrementally updated
/// energy. Exact for integer models; real models accumulate rounding.
fn gray_walk<F: FnMut(u64, f64)>(model: &IsingModel, mut visit: F) {
    let n = model.n();
    let mut spins = vec![-1i8; n];
    let mut fields: Vec<f64> = (0..n)
        .map(|i| model.h()[i] - 2.0 * model.neighbors(i).iter().map(|&(_, v)| v).sum::<f64>())
        .collect();
    let mut energy = model.energy_of(&spins);
    let mut label = 0u64;
    visit(label, energy);
    for t in 1..(1u64 << n) {
        let bit = t.trailing_zeros() as usize;
        let i = n - 1 - bit;
        let old = f64::from(spins[i]);
        energy += 2.0 * old * fields[i];
        spins[i] = -spins[i];
        for &(j, v) in model.neighbors(i) {
            fields[j] -= 4.0 * v * old;
        }
        label ^= 1 << bit;
        visit(label, energy);
    }
}

fn label_energy(model: &IsingModel, label: u64, buf: &mut [i8]) -> f64 {
    let n = buf.len();
    for (i, s) in buf.iter_mut().enumerate() {
        *s = if (label >> (n - 1 - i)) & 1 == 1 { 1 } else { -1 };
    }
    model.energy_of(buf)
}

pub fn brute_force_minima(model: &IsingModel) -> Result<MinimaSet> {
    brute_force_minima_capped(model, DEFAULT_CAP)
}

/// Global minima by full enumeration of the `2^n` states.
///
/// The Gray-code sweep keeps every state within a drift margin of the
/// running minimum; survivors are re-evaluated from scratch, so the returned
/// energies are exact evaluations rather than accumulated sums.
pub fn brute_force_minima_capped(model: &IsingModel, cap: usize) -> Result<MinimaSet> {
    check_cap(model, cap)?;
    let exact = model.is_integral();
    let slack = if exact { 0.0 } else { 1e-7 * (1.0 + model.initial_temperature()) };

    let mut best = f64::INFINITY;
    let mut candidates: Vec<(u64, f64)> = Vec::new();
    gray_walk(model, |label, e| {
        if e < best - slack {
            best = e;
            candidates.retain(|&(_, c)| c <= best + slack);
        } else if e < best {
            best = e;
        }
        if e <= best + slack {
            candidates.push((label, e));
        }
    });

    let mut buf = vec![0i8; model.n()];
    let evaluated: Vec<(u64, f64)> = if exact {
        candidates.into_iter().filter(|&(_, e)| e == best).collect()
    } else {
        candidates.into_iter().map(|(x, _)| (x, label_energy(model, x, &mut buf))).collect()
    };
    let min_energy = evaluated.iter().map(|&(_, e)| e).fold(f64::INFINITY, f64::min);
    let tol = MINIMA_RTOL * min_energy.abs();
    let mut minima: Vec<u64> = evaluated
        .into_iter()
        .filter(|&(_, e)| (e - min_energy).abs() <= tol)
        .map(|(x, _)| x)
        .collect();
    minima.sort_unstable();
    Ok(MinimaSet { n: model.n(), min_energy, g: minima.len(), minima })
}

/// Number of states at each energy level, ascending by energy.
///
/// Integer models are swept in Gray-code order (exact); real-valued models
/// evaluate every state directly so equal levels compare bit-for-bit.
pub fn energy_histogram(model: &IsingModel) -> Result<Vec<(f64, u64)>> {
    energy_histogram_capped(model, DEFAULT_CAP)
}

pub fn energy_histogram_capped(model: &IsingModel, cap: usize) -> Result<Vec<(f64, u64)>> {
    check_cap(model, cap)?;
    let mut counts: HashMap<u64, u64> = HashMap::new();
    // +0.0 and -0.0 must land in one bin
    let key = |e: f64| (e + 0.0).to_bits();
    if model.is_integral() {
        gray_walk(model, |_, e| *counts.entry(key(e)).or_default() += 1);
    } else {
        let mut buf = vec![0i8; model.n()];
        for label in 0..(1u64 << model.n()) {
            *counts.entry(key(label_energy(model, label, &mut buf))).or_default() += 1;
        }
    }
    let mut levels: Vec<(f64, u64)> = counts.into_iter().map(|(k, c)| (f64::from_bits(k), c)).collect();
    levels.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(levels)
}

/// Probability that `k` distinct states drawn uniformly from `space` include
/// at least one of `g` designated states: `1 - C(space - g, k) / C(space, k)`.
///
/// Evaluated as `Σ_i a_i` where `a_i` is the probability that the `i`-th
/// designated state is the first one hit, with
/// `a_0 = k / space` and `a_i = a_{i-1} (space - k - i + 1) / (space - i)`.
/// All terms are non-negative, so the sum carries no cancellation.
pub fn bf_success_probability(space: u64, k: u64, g: u64) -> Result<f64> {
    if space == 0 || k == 0 || k > space || g == 0 || g > space {
        return Err(Error::param(format!(
            "need 1 <= K <= N and 1 <= g <= N, got N={space} K={k} g={g}"
        )));
    }
    let (nf, kf) = (space as f64, k as f64);
    let mut term = kf / nf;
    let mut total = term;
    for i in 1..g {
        let remaining = space - k;
        if i > remaining {
            break;
        }
        term *= (remaining - i + 1) as f64 / (nf - i as f64);
        if term == 0.0 {
            break;
        }
        total += term;
    }
    Ok(total.min(1.0))
}

/// One brute-force trial: draws `k` distinct labels from `0..space` and
/// reports whether any falls in the designated set `0..g`.
pub fn sample_bf_hit<R: Rng + ?Sized>(space: u64, k: u64, g: u64, rng: &mut R) -> bool {
    // Floyd's algorithm over a hash set keeps memory at O(k).
    let mut chosen = std::collections::HashSet::with_capacity(k as usize);
    for j in space - k..space {
        let t = rng.random_range(0..=j);
        if !chosen.insert(t) {
            chosen.insert(j);
        }
    }
    chosen.iter().any(|&x| x < g)
}
