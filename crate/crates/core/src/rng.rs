//! Deterministic random-stream derivation.
//!
//! Every trial owns a ChaCha key built from `(master seed, trial index)`, and
//! every tier inside a trial reads from its own ChaCha stream under that key.
//! Results therefore depend only on the seed and the trial index, never on
//! how trials are spread over worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Named sub-streams of one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamId {
    MbsPoints { attempt: u32 },
    MbsFading,
    LayerPoints { layer: usize, attempt: u32 },
    LayerFading { layer: usize },
    /// Free-form stream for samplers that are not tied to a tier.
    Aux(u32),
}

impl StreamId {
    fn word(self) -> u64 {
        // high byte tags the kind, the rest carries layer and attempt
        match self {
            StreamId::MbsPoints { attempt } => (1 << 56) | attempt as u64,
            StreamId::MbsFading => 2 << 56,
            StreamId::LayerPoints { layer, attempt } => {
                (3 << 56) | ((layer as u64) << 24) | attempt as u64
            }
            StreamId::LayerFading { layer } => (4 << 56) | ((layer as u64) << 24),
            StreamId::Aux(n) => (5 << 56) | n as u64,
        }
    }
}

/// Handle for the random streams of a single trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialStreams {
    pub seed: u64,
    pub trial: u64,
}

impl TrialStreams {
    pub fn new(seed: u64, trial: u64) -> Self {
        Self { seed, trial }
    }

    pub fn stream(&self, id: StreamId) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.trial.to_le_bytes());
        key[16..24].copy_from_slice(b"hetnet01");
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(id.word());
        rng
    }
}

/// Derives an engine-specific seed so two engines fed the same user seed never
/// share random streams.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Tallies that can be merged associatively and exactly.
pub trait Tally: Send + Sized {
    fn merge(self, other: Self) -> Self;
}

/// Runs `trials` independent trials in parallel and merges their tallies.
///
/// `empty` builds the identity tally; `trial` maps a trial index to its tally.
/// Because merging is exact integer addition the result is independent of the
/// worker count and of rayon's splitting.
pub fn run_trials<T, E, F>(trials: u64, empty: E, trial: F) -> T
where
    T: Tally,
    E: Fn() -> T + Sync + Send,
    F: Fn(u64, &mut T) + Sync + Send,
{
    (0..trials)
        .into_par_iter()
        .fold(&empty, |mut acc, t| {
            trial(t, &mut acc);
            acc
        })
        .reduce(&empty, T::merge)
}

/// Runs `f` on a dedicated pool with exactly `workers` threads.
pub fn with_workers<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> R {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("failed to build worker pool")
        .install(f)
}
