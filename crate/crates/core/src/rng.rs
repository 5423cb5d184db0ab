//! Seed derivation and per-task RNG streams.
//!
//! Every randomized operation in this crate receives an [`RngStream`], a
//! lightweight handle that can split off statistically independent child
//! streams by label. Parallel loops give each task its own pre-split child,
//! so results never depend on scheduling or worker count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The concrete RNG handed to base learners and samplers.
pub type TaskRng = ChaCha8Rng;

const GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// splitmix64 finalizer; full-avalanche mixing of a 64-bit word.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from a master seed and a list of integer labels.
///
/// The same (master, labels) pair always yields the same child, and distinct
/// label paths yield (with overwhelming probability) distinct children, so
/// replications can be seeded independently of execution order.
pub fn derive_seed(master: u64, labels: &[u64]) -> u64 {
    let mut state = mix(master ^ GAMMA);
    for &label in labels {
        state = mix(state.wrapping_add(GAMMA).wrapping_add(mix(label ^ GAMMA)));
    }
    state
}

/// Stable 64-bit label for a string (FNV-1a), used to mix method names and
/// other textual identifiers into seed derivation.
pub fn label_for(text: &str) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in text.as_bytes() {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// A splittable random stream identified by a 64-bit state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStream {
    state: u64,
}

impl RngStream {
    pub fn from_seed(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn seed(&self) -> u64 {
        self.state
    }

    /// Child stream for a fixed purpose tag.
    pub fn child(&self, tag: u64) -> Self {
        Self {
            state: derive_seed(self.state, &[tag]),
        }
    }

    /// Child stream for a (purpose, index) pair, e.g. one per ensemble member.
    pub fn child_indexed(&self, tag: u64, index: u64) -> Self {
        Self {
            state: derive_seed(self.state, &[tag, index]),
        }
    }

    /// Instantiates the concrete generator for this stream.
    pub fn rng(&self) -> TaskRng {
        TaskRng::seed_from_u64(self.state)
    }
}

/// Purpose tags for stream splitting. Values are arbitrary but frozen:
/// changing them changes every derived stream.
pub mod tags {
    pub const SUBSAMPLE: u64 = 1;
    pub const LEARN: u64 = 2;
    pub const PHASE1: u64 = 3;
    pub const PHASE2: u64 = 4;
    pub const EPSILON: u64 = 5;
    pub const DATA: u64 = 6;
    pub const ALGO: u64 = 7;
    pub const TRIAL: u64 = 8;
}
