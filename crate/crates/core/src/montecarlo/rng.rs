use rand::{RngCore, SeedableRng};
use rand_chacha::{ChaCha12Rng, ChaCha20Rng, ChaCha8Rng};

use crate::error::{Error, Result};

/// Seed plus generator label; equal specs give bit-identical streams.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RngSpec {
    pub seed: u64,
    /// One of `chacha8`, `chacha12`, `chacha20`.
    pub algorithm: String,
}

impl RngSpec {
    pub const DEFAULT_ALGORITHM: &'static str = "chacha20";

    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            algorithm: Self::DEFAULT_ALGORITHM.to_string(),
        }
    }

    pub fn with_algorithm(seed: u64, algorithm: &str) -> Result<Self> {
        let spec = Self {
            seed,
            algorithm: algorithm.to_string(),
        };
        spec.stream(0)?;
        Ok(spec)
    }

    /// Independent generator number `index`: same seed, distinct ChaCha stream id.
    pub fn stream(&self, index: u64) -> Result<SimRng> {
        let rng = match self.algorithm.as_str() {
            "chacha8" => {
                let mut r = ChaCha8Rng::seed_from_u64(self.seed);
                r.set_stream(index);
                SimRng::ChaCha8(r)
            }
            "chacha12" => {
                let mut r = ChaCha12Rng::seed_from_u64(self.seed);
                r.set_stream(index);
                SimRng::ChaCha12(r)
            }
            "chacha20" => {
                let mut r = ChaCha20Rng::seed_from_u64(self.seed);
                r.set_stream(index);
                SimRng::ChaCha20(r)
            }
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown generator '{other}' (expected chacha8, chacha12 or chacha20)"
                )))
            }
        };
        Ok(rng)
    }
}

/// The generator behind an [`RngSpec`].
#[derive(Clone, Debug)]
pub enum SimRng {
    ChaCha8(ChaCha8Rng),
    ChaCha12(ChaCha12Rng),
    ChaCha20(ChaCha20Rng),
}

impl RngCore for SimRng {
    fn next_u32(&mut self) -> u32 {
        match self {
            SimRng::ChaCha8(r) => r.next_u32(),
            SimRng::ChaCha12(r) => r.next_u32(),
            SimRng::ChaCha20(r) => r.next_u32(),
        }
    }

    fn next_u64(&mut self) -> u64 {
        match self {
            SimRng::ChaCha8(r) => r.next_u64(),
            SimRng::ChaCha12(r) => r.next_u64(),
            SimRng::ChaCha20(r) => r.next_u64(),
        }
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        match self {
            SimRng::ChaCha8(r) => r.fill_bytes(dst),
            SimRng::ChaCha12(r) => r.fill_bytes(dst),
            SimRng::ChaCha20(r) => r.fill_bytes(dst),
        }
    }
}
