//! Benchmark problem families.
//!
//! | family | fields | couplings |
//! |---|---|---|
//! | false minimum | `1 - ε` on the first half, `-1` on the second | ferromagnetic clusters, see [`gen_false_minimum`] |
//! | zero coupling | `±1` uniformly | none |
//! | uniform spin glass | `0` | `±1` uniformly on the complete graph |
//! | Gaussian spin glass | `0` | standard normal on the complete graph |
//!
//! Random families draw from a [`ChaCha8Rng`](rand_chacha::ChaCha8Rng) stream
//! whose seed is mixed from `(master_seed, realization_index, family tag)`.
//! Gaussian couplings use `rand_distr::StandardNormal` (ziggurat sampler).

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::ising::{IsingModel, ModelMetadata};
use crate::rng::{mix, stream, tag_hash};

pub const FALSE_MINIMUM: &str = "false_minimum";
pub const ZERO_COUPLING: &str = "zero_coupling";
pub const UNIFORM_SPIN_GLASS: &str = "uniform_spin_glass";
pub const GAUSSIAN_SPIN_GLASS: &str = "gaussian_spin_glass";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FalseMinimumParams {
    pub n: usize,
    pub epsilon: f64,
}

impl FalseMinimumParams {
    pub fn new(n: usize, epsilon: f64) -> Result<Self> {
        let params = FalseMinimumParams { n, epsilon };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || !self.n.is_multiple_of(4) {
            return Err(Error::param(format!("false-minimum size must be a positive multiple of 4, got {}", self.n)));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::param(format!("epsilon must lie in (0, 1), got {}", self.epsilon)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GeneratorSeed {
    pub master_seed: u64,
    pub realization_index: u64,
}

impl GeneratorSeed {
    pub fn new(master_seed: u64, realization_index: u64) -> Self {
        GeneratorSeed { master_seed, realization_index }
    }

    /// Seed of the random stream used to build one realization of `family`.
    pub fn stream_seed(&self, family: &str) -> u64 {
        mix(&[self.master_seed, self.realization_index, tag_hash(family)])
    }

    fn metadata(&self, family: &str) -> ModelMetadata {
        let mut params = Map::new();
        params.insert("realization".into(), json!(self.realization_index));
        ModelMetadata { family: family.into(), seed: self.master_seed, params }
    }
}

/// A problem family with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Family {
    FalseMinimum { epsilon: f64 },
    ZeroCoupling,
    UniformSpinGlass,
    GaussianSpinGlass,
}

impl Family {
    pub fn tag(&self) -> &'static str {
        match self {
            Family::FalseMinimum { .. } => FALSE_MINIMUM,
            Family::ZeroCoupling => ZERO_COUPLING,
            Family::UniformSpinGlass => UNIFORM_SPIN_GLASS,
            Family::GaussianSpinGlass => GAUSSIAN_SPIN_GLASS,
        }
    }

    /// Whether instances depend on the seed at all.
    pub fn is_random(&self) -> bool {
        !matches!(self, Family::FalseMinimum { .. })
    }

    pub fn check_size(&self, n: usize) -> Result<()> {
        match *self {
            Family::FalseMinimum { epsilon } => FalseMinimumParams { n, epsilon }.validate(),
            Family::ZeroCoupling if n == 0 => Err(Error::param("zero-coupling problems need n >= 1")),
            Family::UniformSpinGlass | Family::GaussianSpinGlass if n < 2 => {
                Err(Error::param(format!("spin glasses need n >= 2, got {n}")))
            }
            _ => Ok(()),
        }
    }

    pub fn generate(&self, n: usize, seed: GeneratorSeed) -> Result<IsingModel> {
        self.check_size(n)?;
        match *self {
            Family::FalseMinimum { epsilon } => {
                let model = gen_false_minimum(FalseMinimumParams { n, epsilon })?;
                let mut meta = model.metadata().clone();
                meta.seed = seed.master_seed;
                Ok(model.with_metadata(meta))
            }
            Family::ZeroCoupling => gen_zero_coupling(n, seed),
            Family::UniformSpinGlass => gen_uniform_spin_glass(n, seed),
            Family::GaussianSpinGlass => gen_gaussian_spin_glass(n, seed),
        }
    }
}

/// Weak-strong cluster instance with a false minimum at all-up.
///
/// Spins `0..n/2` form the weak cluster with `h = 1 - ε`; spins `n/2..n` form
/// the strong cluster with `h = -1`. Each cluster is a ferromagnetic ring
/// (`J = +1` between cyclic neighbours; a single bond when the cluster has two
/// spins) and the clusters are joined by `n/2` ferromagnetic rungs
/// `(i, i + n/2)`. All-down is the unique ground state, all-up is a
/// single-flip local minimum, and the gap between them is `nε`.
pub fn gen_false_minimum(params: FalseMinimumParams) -> Result<IsingModel> {
    params.validate()?;
    let FalseMinimumParams { n, epsilon } = params;
    let half = n / 2;
    let h = (0..n).map(|i| if i < half { 1.0 - epsilon } else { -1.0 }).collect();
    let mut bonds = Vec::new();
    for start in [0, half] {
        for k in 0..half - 1 {
            bonds.push((start + k, start + k + 1, 1.0));
        }
        if half > 2 {
            bonds.push((start, start + half - 1, 1.0));
        }
    }
    bonds.extend((0..half).map(|i| (i, i + half, 1.0)));
    let mut meta_params = Map::new();
    meta_params.insert("epsilon".into(), Value::from(epsilon));
    Ok(IsingModel::new(h, bonds)?.with_metadata(ModelMetadata {
        family: FALSE_MINIMUM.into(),
        seed: 0,
        params: meta_params,
    }))
}

pub fn gen_zero_coupling(n: usize, seed: GeneratorSeed) -> Result<IsingModel> {
    Family::ZeroCoupling.check_size(n)?;
    let mut rng = stream(seed.stream_seed(ZERO_COUPLING));
    let h = (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
    Ok(IsingModel::new(h, [])?.with_metadata(seed.metadata(ZERO_COUPLING)))
}

fn complete_graph<F>(n: usize, mut draw: F) -> Vec<(usize, usize, f64)>
where
    F: FnMut() -> f64,
{
    let mut bonds = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            bonds.push((i, j, draw()));
        }
    }
    bonds
}

pub fn gen_uniform_spin_glass(n: usize, seed: GeneratorSeed) -> Result<IsingModel> {
    Family::UniformSpinGlass.check_size(n)?;
    let mut rng = stream(seed.stream_seed(UNIFORM_SPIN_GLASS));
    let bonds = complete_graph(n, || if rng.random::<bool>() { 1.0 } else { -1.0 });
    Ok(IsingModel::new(vec![0.0; n], bonds)?.with_metadata(seed.metadata(UNIFORM_SPIN_GLASS)))
}

pub fn gen_gaussian_spin_glass(n: usize, seed: GeneratorSeed) -> Result<IsingModel> {
    Family::GaussianSpinGlass.check_size(n)?;
    let mut rng = stream(seed.stream_seed(GAUSSIAN_SPIN_GLASS));
    let bonds = complete_graph(n, || rng.sample(StandardNormal));
    Ok(IsingModel::new(vec![0.0; n], bonds)?.with_metadata(seed.metadata(GAUSSIAN_SPIN_GLASS)))
}
