//! Reproducible random streams.
//!
//! Every draw is a function of `(master_seed, stream_id, counter)`: the master
//! seed keys a ChaCha8 generator, the stream id selects its 64-bit stream and
//! the counter is the generator's word position. Parallel work derives one
//! substream per chunk index, so results never depend on how many workers
//! process the chunks.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeededStream {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl SeededStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        SeededStream { master_seed, stream_id }
    }

    /// A child stream keyed by `key`; distinct keys give distinct streams.
    pub fn substream(&self, key: u64) -> Self {
        let mixed = splitmix64(splitmix64(self.stream_id) ^ splitmix64(key.wrapping_add(0x632B_E59B_D9B4_E019)));
        SeededStream { master_seed: self.master_seed, stream_id: mixed }
    }

    /// Named child stream, for separating roles (targets vs. designs) under one seed.
    pub fn child(&self, role: &str) -> Self {
        let key = role
            .bytes()
            .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3));
        self.substream(key)
    }

    pub fn rng(&self) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform on `[0, 1)` with 53 random bits.
#[inline]
pub fn unit_f64<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform on the open interval `(0, 1)`, for inverse-cdf sampling.
#[inline]
pub fn open_unit_f64<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}
