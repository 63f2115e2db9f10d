// SPDX-License-Identifier: MIT OR Apache-2.0

//! Counter-based seed derivation.
//!
//! A root seed expands to independent per-stage seeds by hashing
//! `(root, stream, index)` through the SplitMix64 finalizer. The mapping is a
//! pure function, so a repetition or tree can be re-run in isolation and
//! reproduce exactly the numbers it produced inside a full run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Named seed streams. The discriminant values are part of the reproducibility
/// contract and must not be renumbered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Stream {
    Split = 1,
    Fold = 2,
    Fit = 3,
    Tree = 4,
    Synth = 5,
    Inner = 6,
    Repetition = 7,
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed for item `index` of `stream` under `root`.
pub fn derive(root: u64, stream: Stream, index: u64) -> u64 {
    let a = splitmix64(root ^ splitmix64(stream as u64));
    splitmix64(a ^ splitmix64(index.wrapping_add(0x632B_E59B_D9B4_E019)))
}

/// A seeded generator whose output is identical on every platform.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
