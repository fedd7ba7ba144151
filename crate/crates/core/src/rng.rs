//! Seed derivation for reproducible experiment sweeps.
//!
//! Every random stream in a sweep is keyed by a path of integers below one
//! root seed, e.g. `(root, [config, trial])`. Each path component is folded in
//! with the SplitMix64 finalizer, so derived seeds do not depend on the order
//! in which trials are scheduled.

/// SplitMix64 output function.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(root: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix64(root), |acc, &part| mix64(acc ^ mix64(part)))
}
