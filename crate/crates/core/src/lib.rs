//! Ensemble (expectation-value) Deutsch-Jozsa versus the classical random
//! algorithm.
//!
//! * [`functions`]: truth tables, lazily sampled balanced functions, enumeration.
//! * [`exact`]: exact rational failure probabilities and their ordering.
//! * [`quantum`]: density-matrix identities at small `n` and the pure-state algorithm.
//! * [`ensemble_sim`] / [`classical_sim`]: Monte Carlo for both algorithms.
//! * [`cli`]: sweeps and report writers behind the `djsim` binary.

pub mod classical_sim;
pub mod cli;
pub mod ensemble_sim;
pub mod error;
pub mod estimate;
pub mod exact;
pub mod functions;
pub mod quantum;
pub mod rng;

pub use error::{Error, Result};
pub use estimate::McEstimate;
pub use exact::ExactProb;
pub use functions::{FunctionClass, LazyBalancedFunction, Oracle, TruthTableFunction};
