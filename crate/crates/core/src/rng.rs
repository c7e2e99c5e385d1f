//! Seed derivation.
//!
//! Every random choice in the crate runs off a `ChaCha8Rng` whose seed is
//! derived from a user-facing `u64` seed plus a purpose tag, so independent
//! concerns (weight init, shuffling, data generation) never share a stream
//! and results are reproducible across platforms.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose tags for deriving independent streams from one seed.
#[derive(Debug, Clone, Copy)]
pub enum Stream {
    EncoderInit,
    DecoderInit,
    ClassifierInit,
    Shuffle,
    ValidationSplit,
    TrainTestSplit,
    Synthesis,
    SynthesisClass(u8),
}

impl Stream {
    fn tag(self) -> u64 {
        match self {
            Stream::EncoderInit => 0x01,
            Stream::DecoderInit => 0x02,
            Stream::ClassifierInit => 0x03,
            Stream::Shuffle => 0x04,
            Stream::ValidationSplit => 0x05,
            Stream::TrainTestSplit => 0x06,
            Stream::Synthesis => 0x07,
            Stream::SynthesisClass(c) => 0x100 + c as u64,
        }
    }
}

/// splitmix64 finalizer; the standard 64-bit mixer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// A seeded generator for the given purpose.
pub fn rng_for(seed: u64, stream: Stream) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(seed ^ mix(stream.tag())))
}
