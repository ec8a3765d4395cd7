//! Ising problem instances and spin configurations.
//!
//! The energy of a configuration `s ∈ {-1, +1}^n` is
//!
//! ```text
//! E(s) = -( Σ_i h_i s_i + Σ_i Σ_j J_ij s_i s_j )
//! ```
//!
//! where the double sum runs over all *ordered* pairs. Couplings are stored
//! once per unordered pair `(i, j)` with `i < j`, so every stored bond
//! contributes twice. The same convention is used by [`IsingModel::delta_energy`]
//! and [`IsingModel::initial_temperature`].
//!
//! Spin indices are 0-based everywhere, including the JSON problem format.

use std::collections::HashSet;

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

/// One stored bond `J_ij = J_ji = value`, `i < j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coupling {
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

/// Provenance of a model: which family produced it and from which seed.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ModelMetadata {
    pub family: String,
    pub seed: u64,
    pub params: Map<String, Value>,
}

/// An immutable Ising problem instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProblemFile", into = "ProblemFile")]
pub struct IsingModel {
    h: Vec<f64>,
    couplings: Vec<Coupling>,
    metadata: ModelMetadata,
    // Derived: neighbours of each spin with the coupling value.
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl IsingModel {
    /// Builds a model from local fields and `(i, j, J_ij)` bonds.
    ///
    /// Bonds may be given with `i > j`; they are normalised to `i < j` and
    /// sorted. Self-couplings and repeated pairs are rejected.
    pub fn new(h: Vec<f64>, couplings: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let n = h.len();
        if n == 0 {
            return Err(Error::param("a model needs at least one spin"));
        }
        if let Some(bad) = h.iter().position(|v| !v.is_finite()) {
            return Err(Error::param(format!("h[{bad}] is not finite")));
        }
        let mut bonds = Vec::new();
        let mut seen = HashSet::new();
        for (a, b, value) in couplings {
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            if i == j {
                return Err(Error::InvalidCoupling { i: a, j: b, reason: "self-coupling" });
            }
            if j >= n {
                return Err(Error::IndexOutOfRange { index: j, n });
            }
            if !value.is_finite() {
                return Err(Error::InvalidCoupling { i, j, reason: "non-finite value" });
            }
            if !seen.insert((i, j)) {
                return Err(Error::InvalidCoupling { i, j, reason: "pair listed twice" });
            }
            bonds.push(Coupling { i, j, value });
        }
        bonds.sort_by_key(|c| (c.i, c.j));

        let mut adjacency = vec![Vec::new(); n];
        for c in &bonds {
            adjacency[c.i].push((c.j, c.value));
            adjacency[c.j].push((c.i, c.value));
        }
        Ok(IsingModel { h, couplings: bonds, metadata: ModelMetadata::default(), adjacency })
    }

    pub fn with_metadata(mut self, metadata: ModelMetadata) -> Self {
        self.metadata = metadata;
        self
    }

    pub fn n(&self) -> usize {
        self.h.len()
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn couplings(&self) -> &[Coupling] {
        &self.couplings
    }

    pub fn metadata(&self) -> &ModelMetadata {
        &self.metadata
    }

    /// Neighbours of spin `i` as `(j, J_ij)`.
    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adjacency[i]
    }

    /// `J_ij` for any pair; zero on the diagonal and for absent bonds.
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.adjacency
            .get(i)
            .and_then(|row| row.iter().find(|(k, _)| *k == j))
            .map_or(0.0, |&(_, v)| v)
    }

    /// True when every field and coupling is an integer, in which case
    /// energies and energy differences are computed exactly.
    pub fn is_integral(&self) -> bool {
        self.h.iter().all(|v| v.fract() == 0.0) && self.couplings.iter().all(|c| c.value.fract() == 0.0)
    }

    fn check_len(&self, s: &SpinConfig) -> Result<()> {
        if s.len() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), actual: s.len() });
        }
        Ok(())
    }

    pub fn energy(&self, s: &SpinConfig) -> Result<f64> {
        self.check_len(s)?;
        Ok(self.energy_of(s.as_slice()))
    }

    pub(crate) fn energy_of(&self, spins: &[i8]) -> f64 {
        let field: f64 = self.h.iter().zip(spins).map(|(h, &s)| h * f64::from(s)).sum();
        let bonds: f64 = self
            .couplings
            .iter()
            .map(|c| c.value * f64::from(spins[c.i] * spins[c.j]))
            .sum();
        -(field + 2.0 * bonds)
    }

    /// `E(s') - E(s)` where `s'` is `s` with the spins in `flips` negated.
    ///
    /// Only bonds crossing the boundary of the flipped set change sign, so
    /// the cost is proportional to the degree of the flipped spins.
    pub fn delta_energy(&self, s: &SpinConfig, flips: &[usize]) -> Result<f64> {
        self.check_len(s)?;
        let n = self.n();
        if flips.is_empty() {
            return Err(Error::EmptyFlipSet);
        }
        let mut in_set = vec![false; n];
        for &i in flips {
            if i >= n {
                return Err(Error::IndexOutOfRange { index: i, n });
            }
            if std::mem::replace(&mut in_set[i], true) {
                return Err(Error::DuplicateIndex(i));
            }
        }
        let spins = s.as_slice();
        let mut field = 0.0;
        let mut boundary = 0.0;
        for &i in flips {
            let si = f64::from(spins[i]);
            field += self.h[i] * si;
            for &(j, v) in &self.adjacency[i] {
                if !in_set[j] {
                    boundary += v * si * f64::from(spins[j]);
                }
            }
        }
        Ok(2.0 * field + 4.0 * boundary)
    }

    /// `T0 = Σ_i |h_i| + Σ_i Σ_j |J_ij|`, an upper bound on `|E(s)|`.
    pub fn initial_temperature(&self) -> f64 {
        let field: f64 = self.h.iter().map(|v| v.abs()).sum();
        let bonds: f64 = self.couplings.iter().map(|c| c.value.abs()).sum();
        field + 2.0 * bonds
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// On-disk layout of a problem instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemFile {
    pub n: usize,
    pub h: Vec<f64>,
    #[serde(rename = "J")]
    pub j: Vec<(usize, usize, f64)>,
    pub family: String,
    pub seed: u64,
    #[serde(default)]
    pub params: Map<String, Value>,
}

impl TryFrom<ProblemFile> for IsingModel {
    type Error = Error;

    fn try_from(file: ProblemFile) -> Result<Self> {
        if file.h.len() != file.n {
            return Err(Error::DimensionMismatch { expected: file.n, actual: file.h.len() });
        }
        if let Some(&(i, j, _)) = file.j.iter().find(|(i, j, _)| i >= j) {
            return Err(Error::InvalidCoupling { i, j, reason: "pairs must be stored with i < j" });
        }
        let model = IsingModel::new(file.h, file.j)?;
        Ok(model.with_metadata(ModelMetadata { family: file.family, seed: file.seed, params: file.params }))
    }
}

impl From<IsingModel> for ProblemFile {
    fn from(model: IsingModel) -> Self {
        ProblemFile {
            n: model.n(),
            j: model.couplings.iter().map(|c| (c.i, c.j, c.value)).collect(),
            h: model.h,
            family: model.metadata.family,
            seed: model.metadata.seed,
            params: model.metadata.params,
        }
    }
}

/// A point of `{-1, +1}^n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct SpinConfig(Vec<i8>);

impl SpinConfig {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if let Some(&bad) = spins.iter().find(|&&v| v != 1 && v != -1) {
            return Err(Error::InvalidSpin(bad));
        }
        Ok(SpinConfig(spins))
    }

    pub fn all_down(n: usize) -> Self {
        SpinConfig(vec![-1; n])
    }

    pub fn all_up(n: usize) -> Self {
        SpinConfig(vec![1; n])
    }

    /// Uniformly random configuration.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        SpinConfig((0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn get(&self, i: usize) -> i8 {
        self.0[i]
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i] = -self.0[i];
    }

    /// Copy with the listed spins negated. Indices must be in range.
    pub fn flipped(&self, flips: &[usize]) -> Self {
        let mut out = self.clone();
        for &i in flips {
            out.flip(i);
        }
        out
    }

    /// Global spin flip `-s`.
    pub fn negated(&self) -> Self {
        SpinConfig(self.0.iter().map(|v| -v).collect())
    }

    /// Integer label `x = x_1 2^(n-1) + ... + x_n 2^0` with `x_i = (s_i + 1) / 2`.
    ///
    /// Spin 0 is the most significant bit. Requires `n <= 64`.
    pub fn encode(&self) -> Result<u64> {
        if self.len() > 64 {
            return Err(Error::param(format!("cannot label {} spins in 64 bits", self.len())));
        }
        Ok(self.0.iter().fold(0u64, |x, &s| (x << 1) | u64::from(s > 0)))
    }

    /// Inverse of [`SpinConfig::encode`].
    pub fn decode(label: u64, n: usize) -> Result<Self> {
        if n == 0 || n > 64 || (n < 64 && label >> n != 0) {
            return Err(Error::LabelOutOfRange { label, n });
        }
        Ok(SpinConfig(
            (0..n).map(|i| if (label >> (n - 1 - i)) & 1 == 1 { 1 } else { -1 }).collect(),
        ))
    }
}

impl TryFrom<Vec<i8>> for SpinConfig {
    type Error = Error;

    fn try_from(v: Vec<i8>) -> Result<Self> {
        SpinConfig::new(v)
    }
}

impl From<SpinConfig> for Vec<i8> {
    fn from(s: SpinConfig) -> Self {
        s.0
    }
}

pub fn energy(model: &IsingModel, s: &SpinConfig) -> Result<f64> {
    model.energy(s)
}

pub fn delta_energy(model: &IsingModel, s: &SpinConfig, flips: &[usize]) -> Result<f64> {
    model.delta_energy(s, flips)
}

pub fn initial_temperature(model: &IsingModel) -> f64 {
    model.initial_temperature()
}

pub fn encode_state(s: &SpinConfig) -> Result<u64> {
    s.encode()
}

pub fn decode_state(label: u64, n: usize) -> Result<SpinConfig> {
    SpinConfig::decode(label, n)
}

/// Incrementally maintained spin state used inside the annealing loop.
///
/// Keeps the effective fields `f_i = h_i + 2 Σ_j J_ij s_j` so that the energy
/// change of flipping a set `F` costs `O(|F|^2)`:
///
/// ```text
/// ΔE = 2 Σ_{i∈F} s_i f_i - 8 Σ_{{i,j}⊂F} J_ij s_i s_j
/// ```
#[derive(Debug, Clone)]
pub struct FieldState<'m> {
    model: &'m IsingModel,
    dense: Vec<f64>,
    spins: Vec<i8>,
    fields: Vec<f64>,
    energy: f64,
}

impl<'m> FieldState<'m> {
    pub fn new(model: &'m IsingModel, s: &SpinConfig) -> Result<Self> {
        model.check_len(s)?;
        let n = model.n();
        let mut dense = vec![0.0; n * n];
        for c in model.couplings() {
            dense[c.i * n + c.j] = c.value;
            dense[c.j * n + c.i] = c.value;
        }
        let spins = s.as_slice().to_vec();
        let fields = (0..n)
            .map(|i| {
                model.h[i] + 2.0 * model.neighbors(i).iter().map(|&(j, v)| v * f64::from(spins[j])).sum::<f64>()
            })
            .collect();
        let energy = model.energy_of(&spins);
        Ok(FieldState { model, dense, spins, fields, energy })
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn to_config(&self) -> SpinConfig {
        SpinConfig(self.spins.clone())
    }

    /// Energy change for flipping the distinct indices in `flips`.
    pub fn delta(&self, flips: &[usize]) -> f64 {
        let n = self.spins.len();
        let mut linear = 0.0;
        let mut inner = 0.0;
        for (a, &i) in flips.iter().enumerate() {
            let si = f64::from(self.spins[i]);
            linear += si * self.fields[i];
            let row = &self.dense[i * n..(i + 1) * n];
            for &j in &flips[..a] {
                inner += row[j] * si * f64::from(self.spins[j]);
            }
        }
        2.0 * linear - 8.0 * inner
    }

    /// Applies a flip whose energy change `delta` was computed by [`FieldState::delta`].
    pub fn apply(&mut self, flips: &[usize], delta: f64) {
        let n = self.spins.len();
        for &i in flips {
            let old = f64::from(self.spins[i]);
            self.spins[i] = -self.spins[i];
            let row = &self.dense[i * n..(i + 1) * n];
            for (f, &v) in self.fields.iter_mut().zip(row) {
                *f -= 4.0 * v * old;
            }
        }
        self.energy += delta;
    }

    /// Full recomputation of the energy of the current spins.
    pub fn recompute_energy(&self) -> f64 {
        self.model.energy_of(&self.spins)
    }
}
