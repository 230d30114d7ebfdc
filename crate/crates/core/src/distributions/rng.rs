//! Reproducible uniform streams.
//!
//! Every stream is a ChaCha8 keystream: the 64-bit seed fixes the key and the
//! stream number selects an independent counter sequence. Replication `r` of
//! a simulation reads stream `r` of the master seed, so its draws depend only
//! on `(seed, r)` and never on scheduling. ChaCha output is specified
//! bit-for-bit, which makes samples identical across platforms.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct UniformStream {
    rng: ChaCha8Rng,
}

impl UniformStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        UniformStream { rng }
    }

    /// Next draw from the open interval `(0, 1)`.
    pub fn next_open01(&mut self) -> f64 {
        uniform_open01(self.rng.next_u64())
    }
}

/// Maps 64 random bits to `(k + 1/2) / 2^52` for the top 52 bits `k`. Every
/// result is exactly representable, so neither endpoint is ever returned.
pub fn uniform_open01(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}
