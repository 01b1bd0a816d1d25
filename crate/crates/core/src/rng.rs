//! Splittable random streams for reproducible parallel Monte Carlo.
//!
//! Every path in a batch draws from its own generator, derived purely from
//! `(master_seed, stream_index)`. Results therefore depend only on the seed
//! and the path index, never on how the batch was scheduled across workers.

use rand_pcg::Pcg64Mcg;

/// SplitMix64 step. Used only for seed derivation; the actual sampling
/// generator is PCG.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives the generator for one stream of a master seed.
///
/// Streams with distinct `(master_seed, stream_index)` are decorrelated by
/// running the index through SplitMix64 before seeding the 128-bit PCG state.
pub fn stream_rng(master_seed: u64, stream_index: u64) -> Pcg64Mcg {
    let mut s = master_seed ^ 0x6a09_e667_f3bc_c908;
    let a = splitmix64(&mut s);
    let mut t = stream_index.wrapping_add(0x510e_527f_ade6_82d1) ^ a;
    let lo = splitmix64(&mut t);
    let hi = splitmix64(&mut t);
    Pcg64Mcg::new(((hi as u128) << 64) | lo as u128)
}

/// Stream indices reserved for purposes other than path generation
/// (e.g. bootstrap resampling), kept away from small path indices.
pub const AUX_STREAM_BASE: u64 = 1 << 48;
