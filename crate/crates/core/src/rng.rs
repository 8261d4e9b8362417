//! Seeding and sampling utilities.
//!
//! All randomness flows from explicit 64-bit seeds. Sub-streams (per row, per
//! replication, per Monte Carlo draw) use seeds derived by [`derive_seed`],
//! which mixes `master ^ stream` and then the index through two rounds of
//! SplitMix64. Draws are always produced in `f64` and converted to the target
//! scalar afterwards, so the underlying random stream does not depend on the
//! scalar type.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::scalar::Real;

/// SplitMix64 finalizer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed for sub-stream `stream` at position `index`:
/// `splitmix64(splitmix64(master ^ stream) ^ index)`.
pub fn derive_seed(master: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master ^ stream) ^ index)
}

/// Fixed stream tags; values are arbitrary but frozen for reproducibility.
pub mod streams {
    pub const PARTITION: u64 = 0x7061_7274; // "part"
    pub const SOLVER_INIT: u64 = 0x696e_6974; // "init"
    pub const SOLVER_STEP: u64 = 0x7374_6570; // "step"
    pub const DATAGEN_ROW: u64 = 0x6461_7461; // "data"
    pub const MC_DRAW: u64 = 0x6d63_6d63; // "mcmc"
    pub const CV_FOLD: u64 = 0x666f_6c64; // "fold"
    pub const CV_SCORE: u64 = 0x7363_6f72; // "scor"
    pub const DIRECTION: u64 = 0x6469_7273; // "dirs"
    pub const REPLICATION: u64 = 0x7265_7073; // "reps"
    pub const POWER_ITER: u64 = 0x706f_7765; // "powe"
}

/// Deterministic generator for one (sub-)stream.
pub fn chacha(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard normal draw converted to `F`.
pub fn standard_normal<F: Real, R: Rng>(rng: &mut R) -> F {
    let z: f64 = StandardNormal.sample(rng);
    F::from64(z)
}

/// Uniform draw on `[0, 1)` converted to `F`.
pub fn uniform01<F: Real, R: Rng>(rng: &mut R) -> F {
    F::from64(rng.random::<f64>())
}

/// Rademacher sign (`+1` or `-1` with equal probability).
pub fn rademacher<F: Real, R: Rng>(rng: &mut R) -> F {
    if rng.random::<bool>() {
        F::one()
    } else {
        -F::one()
    }
}

/// Student t draw with 5 degrees of freedom via the ratio construction
/// `z / sqrt(chi2_5 / 5)` where `chi2_5` is a sum of five squared normals.
pub fn student_t5<F: Real, R: Rng>(rng: &mut R) -> F {
    let z: f64 = StandardNormal.sample(rng);
    let mut chi2 = 0.0_f64;
    for _ in 0..5 {
        let w: f64 = StandardNormal.sample(rng);
        chi2 += w * w;
    }
    F::from64(z / (chi2 / 5.0).sqrt())
}
