//! Annealing kernels.
//!
//! All three methods share the fast schedule `T(k) = T0 / k`, `k = 1..=K`,
//! and the Metropolis skeleton: a strictly downhill candidate is always
//! accepted, anything else is accepted with a method-specific probability.
//!
//! - `SA` flips one uniformly chosen spin per step and uses the Boltzmann
//!   factor `exp(-ΔE / T)`.
//! - `SAM` flips a uniformly random number `m ∈ 1..=n` of distinct spins and
//!   uses the Boltzmann factor.
//! - `SAQ` uses the SAM proposal with the tunneling-like factor
//!   `exp(-d sqrt(ΔE / T))`, `d` being the Hamming distance of the move.
//!
//! Every step consumes the proposal draws followed by exactly one uniform
//! acceptance draw, whether or not it is needed. SAM and SAQ runs seeded
//! identically therefore see the same proposal sequence.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ising::{FieldState, IsingModel, SpinConfig};
use crate::oracle::MinimaSet;
use crate::rng::stream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    SA,
    SAM,
    SAQ,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::SA, Method::SAM, Method::SAQ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::SA => "SA",
            Method::SAM => "SAM",
            Method::SAQ => "SAQ",
        }
    }

    pub fn is_multi_flip(&self) -> bool {
        !matches!(self, Method::SA)
    }

    /// Probability of accepting a move that is not strictly downhill.
    pub fn acceptance(&self, delta_e: f64, temperature: f64, distance: usize) -> f64 {
        match self {
            Method::SA | Method::SAM => accept_prob_boltzmann(delta_e, temperature),
            Method::SAQ => accept_prob_quantum(delta_e, temperature, distance),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "SA" => Ok(Method::SA),
            "SAM" => Ok(Method::SAM),
            "SAQ" => Ok(Method::SAQ),
            other => Err(Error::param(format!("unknown method {other:?}"))),
        }
    }
}

/// The fast annealing schedule `T(k) = T0 / k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub t0: f64,
    pub steps: u64,
}

impl Schedule {
    pub fn new(t0: f64, steps: u64) -> Self {
        Schedule { t0, steps }
    }

    /// Temperature at step `k`, counting from 1.
    pub fn temperature(&self, k: u64) -> f64 {
        self.t0 / k as f64
    }

    pub fn final_temperature(&self) -> f64 {
        self.temperature(self.steps)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnealParams {
    pub method: Method,
    pub steps: u64,
    /// Replaces the default `T0 = Σ|h| + Σ|J|` when set.
    pub t0_override: Option<f64>,
    /// Seed of the run's random stream.
    pub seed: u64,
}

impl AnnealParams {
    pub fn new(method: Method, steps: u64, seed: u64) -> Self {
        AnnealParams { method, steps, t0_override: None, seed }
    }

    pub fn schedule(&self, model: &IsingModel) -> Schedule {
        Schedule::new(self.t0_override.unwrap_or_else(|| model.initial_temperature()), self.steps)
    }

    fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::param("annealing needs at least one step"));
        }
        if let Some(t0) = self.t0_override {
            if !(t0 >= 0.0 && t0.is_finite()) {
                return Err(Error::param(format!("initial temperature must be finite and non-negative, got {t0}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub final_state: SpinConfig,
    pub final_energy: f64,
    pub best_state: SpinConfig,
    pub best_energy: f64,
    pub accepted_moves: u64,
    /// Final state is a global minimum. Set by [`RunOutcome::mark`].
    pub success: bool,
    /// Some visited state was a global minimum. Diagnostic only.
    pub best_success: bool,
}

impl RunOutcome {
    /// Scores the run against the exact ground-state set.
    pub fn mark(&mut self, minima: &MinimaSet) -> Result<()> {
        self.success = minima.contains(&self.final_state)?;
        self.best_success = minima.contains(&self.best_state)?;
        Ok(())
    }
}

/// One line of the optional step trace.
#[derive(Debug, Clone, PartialEq)]
pub struct StepEvent<'a> {
    pub k: u64,
    pub temperature: f64,
    pub flips: &'a [usize],
    pub delta_e: f64,
    pub accepted: bool,
}

impl fmt::Display for StepEvent<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{:e}\t", self.k, self.temperature)?;
        for (a, i) in self.flips.iter().enumerate() {
            if a > 0 {
                f.write_str(",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "\t{}\t{}", self.delta_e, u8::from(self.accepted))
    }
}

pub fn accept_prob_boltzmann(delta_e: f64, temperature: f64) -> f64 {
    if temperature <= 0.0 {
        return 1.0;
    }
    (-delta_e / temperature).exp().clamp(0.0, 1.0)
}

pub fn accept_prob_quantum(delta_e: f64, temperature: f64, distance: usize) -> f64 {
    if temperature <= 0.0 {
        return 1.0;
    }
    (-(distance as f64) * (delta_e.max(0.0) / temperature).sqrt()).exp().clamp(0.0, 1.0)
}

pub fn hamming_distance(a: &SpinConfig, b: &SpinConfig) -> Result<usize> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), actual: b.len() });
    }
    Ok(a.as_slice().iter().zip(b.as_slice()).filter(|(x, y)| x != y).count())
}

/// Reusable move generator. Multi-flip subsets come from a partial
/// Fisher-Yates shuffle over a persistent index permutation.
#[derive(Debug, Clone)]
struct Proposer {
    perm: Vec<usize>,
    one: [usize; 1],
}

impl Proposer {
    fn new(n: usize) -> Self {
        Proposer { perm: (0..n).collect(), one: [0] }
    }

    fn single<R: Rng + ?Sized>(&mut self, rng: &mut R) -> &[usize] {
        self.one[0] = rng.random_range(0..self.perm.len());
        &self.one
    }

    fn multi<R: Rng + ?Sized>(&mut self, rng: &mut R) -> &[usize] {
        let n = self.perm.len();
        let m = rng.random_range(1..=n);
        for a in 0..m {
            let b = rng.random_range(a..n);
            self.perm.swap(a, b);
        }
        &self.perm[..m]
    }
}

/// Single-flip proposal: one spin chosen uniformly.
pub fn propose_single<R: Rng + ?Sized>(s: &SpinConfig, rng: &mut R) -> (SpinConfig, Vec<usize>) {
    let flips = vec![rng.random_range(0..s.len())];
    (s.flipped(&flips), flips)
}

/// Multi-flip proposal: `m` uniform on `1..=n`, then a uniform `m`-subset.
pub fn propose_multi<R: Rng + ?Sized>(s: &SpinConfig, rng: &mut R) -> (SpinConfig, Vec<usize>) {
    let flips = Proposer::new(s.len()).multi(rng).to_vec();
    (s.flipped(&flips), flips)
}

/// Runs one anneal from `initial` using the stream seeded by `params.seed`.
pub fn anneal_run(model: &IsingModel, params: &AnnealParams, initial: &SpinConfig) -> Result<RunOutcome> {
    let mut rng = stream(params.seed);
    run_with(model, params, initial, &mut rng, |_| {})
}

/// Draws a uniformly random initial state from the run's stream, then anneals
/// with the same stream.
pub fn anneal_from_random(model: &IsingModel, params: &AnnealParams) -> Result<RunOutcome> {
    let mut rng = stream(params.seed);
    let initial = SpinConfig::random(model.n(), &mut rng);
    run_with(model, params, &initial, &mut rng, |_| {})
}

/// As [`anneal_run`], writing one tab-separated line per step to `out`:
/// `k  T  flips  delta_e  accepted`.
pub fn anneal_run_traced<W: Write>(
    model: &IsingModel,
    params: &AnnealParams,
    initial: &SpinConfig,
    out: &mut W,
) -> Result<RunOutcome> {
    let mut rng = stream(params.seed);
    let mut io_err = None;
    let outcome = run_with(model, params, initial, &mut rng, |ev| {
        if io_err.is_none() {
            if let Err(e) = writeln!(out, "{ev}") {
                io_err = Some(e);
            }
        }
    })?;
    match io_err {
        Some(e) => Err(e.into()),
        None => Ok(outcome),
    }
}

/// The annealing loop with an arbitrary random source and step observer.
pub fn run_with<R, O>(
    model: &IsingModel,
    params: &AnnealParams,
    initial: &SpinConfig,
    rng: &mut R,
    mut observe: O,
) -> Result<RunOutcome>
where
    R: Rng + ?Sized,
    O: FnMut(&StepEvent<'_>),
{
    params.validate()?;
    if initial.len() != model.n() {
        return Err(Error::DimensionMismatch { expected: model.n(), actual: initial.len() });
    }
    let schedule = params.schedule(model);
    let exact = model.is_integral();
    let mut state = FieldState::new(model, initial)?;
    let mut proposer = Proposer::new(model.n());
    let mut best_state = initial.clone();
    let mut best_energy = state.energy();
    let mut accepted_moves = 0;

    for k in 1..=schedule.steps {
        let temperature = schedule.temperature(k);
        let flips = match params.method {
            Method::SA => proposer.single(rng),
            Method::SAM | Method::SAQ => proposer.multi(rng),
        };
        let u: f64 = rng.random();
        let delta_e = state.delta(flips);
        let accepted = delta_e < 0.0
            || schedule.t0 == 0.0
            || u < params.method.acceptance(delta_e, temperature, flips.len());
        observe(&StepEvent { k, temperature, flips, delta_e, accepted });
        if accepted {
            state.apply(flips, delta_e);
            accepted_moves += 1;
            if state.energy() < best_energy {
                best_energy = state.energy();
                best_state = state.to_config();
            }
        }
        if cfg!(debug_assertions) && k % 1024 == 0 {
            check_bookkeeping(&state, exact, schedule.t0);
        }
    }
    if cfg!(debug_assertions) {
        check_bookkeeping(&state, exact, schedule.t0);
    }

    Ok(RunOutcome {
        final_energy: state.energy(),
        final_state: state.to_config(),
        best_state,
        best_energy,
        accepted_moves,
        success: false,
        best_success: false,
    })
}

fn check_bookkeeping(state: &FieldState<'_>, exact: bool, t0: f64) {
    let full = state.recompute_energy();
    if exact {
        assert_eq!(state.energy(), full, "incremental energy drifted");
    } else {
        assert!((state.energy() - full).abs() <= 1e-9 * (1.0 + t0), "incremental energy drifted");
    }
}
