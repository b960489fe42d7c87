//! Seeded random streams.
//!
//! Every simulated series owns one ChaCha8 stream identified by a
//! `(seed, stream)` pair. Monte Carlo replication `r` under base seed `s`
//! uses stream `r` of key `s`, so replications are independent of each other
//! and of the order in which they are scheduled.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSeed {
    pub seed: u64,
    pub stream: u64,
}

impl RngSeed {
    pub fn new(seed: u64) -> Self {
        Self { seed, stream: 0 }
    }

    /// Seed for replication `index` under `base`.
    pub fn derive(base: u64, index: u64) -> Self {
        Self {
            seed: base,
            stream: index,
        }
    }

    pub fn stream(&self) -> RandomStream {
        RandomStream::new(*self)
    }
}

impl From<u64> for RngSeed {
    fn from(seed: u64) -> Self {
        Self::new(seed)
    }
}

pub struct RandomStream {
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: RngSeed) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.seed);
        rng.set_stream(seed.stream);
        Self { rng }
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}
