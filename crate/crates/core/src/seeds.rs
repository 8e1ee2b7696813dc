//! Deterministic, splittable random-number streams.
//!
//! Replicate `i` of a batch draws from stream `i` of a ChaCha generator keyed
//! by the master seed. Streams are independent by construction, so batches
//! can run on any number of workers in any order and still produce the same
//! numbers per replicate.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Generator for one replicate of a batch.
pub fn replicate_rng(seed: u64, replicate: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}

/// Derive a fresh master seed for a named sub-experiment, so that nested
/// batches never share streams with their parent.
pub fn derive_seed(seed: u64, salt: u64) -> u64 {
    // splitmix64 finalizer on seed ^ golden-ratio-scaled salt
    let mut z = seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
