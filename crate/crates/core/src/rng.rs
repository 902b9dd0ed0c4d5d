//! Deterministic per-trial random streams.
//!
//! Every trial gets its own ChaCha20 stream keyed by `(seed, purpose, trial)`,
//! so results do not depend on how trials are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Name recorded in run metadata.
pub const RNG_ALGORITHM: &str = "ChaCha20 (seed_from_u64, one stream per trial)";

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a purpose tag into the seed so that, for example, calibration and
/// evaluation trials never share a stream.
pub fn derive_seed(seed: u64, purpose: &str) -> u64 {
    // FNV-1a over the tag, then one splitmix round
    let tag = purpose
        .bytes()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3));
    splitmix64(seed ^ splitmix64(tag))
}

pub fn trial_rng(seed: u64, trial: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}
