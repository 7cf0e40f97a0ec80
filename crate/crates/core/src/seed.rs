//! Seed derivation for independent, reproducible random streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream identifiers within one network seed.
pub(crate) const STREAM_PARAMS: u64 = 0;
pub(crate) const STREAM_MASK: u64 = 1;
pub(crate) const STREAM_WEIGHTS: u64 = 2;

/// Tag mixed into a network seed to obtain its thalamic noise seed.
const NOISE_TAG: u64 = 0x6e6f_6973_655f_7468;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds `parts` into one 64-bit seed. Order matters: `[a, b] != [b, a]`.
pub fn mix_seed(parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(0x5eed_u64, |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// Seed for the evaluation of `individual` in `generation` of a run.
pub fn evaluation_seed(global_seed: u64, generation: usize, individual: usize) -> u64 {
    mix_seed(&[global_seed, generation as u64, individual as u64])
}

/// Thalamic noise seed paired with a network seed.
pub fn noise_seed_for(network_seed: u64) -> u64 {
    mix_seed(&[network_seed, NOISE_TAG])
}

pub(crate) fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
