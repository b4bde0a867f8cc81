//! Independent random streams per replication.
//!
//! Each replication seeds ChaCha8 from `(seed, replication)` and selects a
//! distinct ChaCha stream per purpose, so the streams never overlap.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stream {
    /// Inducing-point selection during fits.
    Fit,
    /// Scramble of the initial design (continued by quasi-random sampling).
    InitialDesign,
    ReferenceSet,
    /// Scrambles of the optimizer's raw candidates.
    Candidates,
    /// Bernoulli outcomes.
    Outcomes,
    /// Held-out evaluation points; never seen by the model or optimizer.
    TestSet,
}

impl Stream {
    pub const ALL: [Stream; 6] = [
        Stream::Fit,
        Stream::InitialDesign,
        Stream::ReferenceSet,
        Stream::Candidates,
        Stream::Outcomes,
        Stream::TestSet,
    ];

    pub fn id(self) -> u64 {
        match self {
            Stream::Fit => 1,
            Stream::InitialDesign => 2,
            Stream::ReferenceSet => 3,
            Stream::Candidates => 4,
            Stream::Outcomes => 5,
            Stream::TestSet => 6,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for replication `replication` of an experiment with base `seed`.
pub fn replication_seed(seed: u64, replication: usize) -> u64 {
    splitmix64(splitmix64(seed) ^ replication as u64)
}

pub fn stream_rng(seed: u64, replication: usize, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(replication_seed(seed, replication));
    rng.set_stream(stream.id());
    rng
}
