//! Ising spin systems and classical annealing with single and multiple
//! simultaneous spin flips.
//!
//! The crate is organised bottom-up:
//!
//! - [`ising`]: problem instances, spin configurations, energies and the
//!   integer state labelling.
//! - [`generators`]: the four benchmark problem families.
//! - [`anneal`]: the SA, SAM and SAQ kernels and the fast `T0/k` schedule.
//! - [`oracle`]: exhaustive enumeration of ground states and the exact
//!   success probability of uniform random search.
//! - [`stats`]: Clopper-Pearson intervals, time to solution and restart
//!   arithmetic.

pub mod anneal;
pub mod error;
pub mod generators;
pub mod ising;
pub mod oracle;
pub mod rng;
pub mod stats;

pub use anneal::{anneal_run, AnnealParams, Method, RunOutcome, Schedule};
pub use error::{Error, Result};
pub use generators::{FalseMinimumParams, Family, GeneratorSeed};
pub use ising::{IsingModel, SpinConfig};
pub use oracle::MinimaSet;
pub use stats::{SuccessEstimate, TtsBasis, TtsResult};
