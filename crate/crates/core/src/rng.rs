//! Reproducible random substreams.
//!
//! ChaCha is counter based: the key comes from `(seed, domain)` and each
//! trial reads its own stream, so a trial's draws do not depend on which
//! worker runs it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Separates the streams of different simulations that share a user seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamDomain {
    Ensemble = 1,
    Classical = 2,
    QuantumSampling = 3,
}

pub type TrialRng = ChaCha8Rng;

/// The generator for trial `trial` of a run keyed by `seed`.
pub fn trial_rng(seed: u64, domain: StreamDomain, trial: u64) -> TrialRng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(domain as u64).to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(trial);
    rng
}
