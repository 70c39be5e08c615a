use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent random sources feeding one noise path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Substream {
    Brownian = 1,
    LevyJumps = 2,
    Renewal = 3,
    Marks = 4,
}

const DOMAIN: u64 = u64::from_le_bytes(*b"semireg\0");

/// Keyed random stream for one replication. The ChaCha key is built from
/// `(base_seed, stream_index, substream)`, so every substream of every
/// replication is an independent, reproducible sequence regardless of the
/// order or thread in which replications run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub base_seed: u64,
    pub stream_index: u64,
}

impl RngStream {
    pub fn new(base_seed: u64, stream_index: u64) -> Self {
        Self {
            base_seed,
            stream_index,
        }
    }

    pub fn substream(&self, tag: Substream) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.base_seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.stream_index.to_le_bytes());
        key[16..24].copy_from_slice(&(tag as u64).to_le_bytes());
        key[24..].copy_from_slice(&DOMAIN.to_le_bytes());
        ChaCha8Rng::from_seed(key)
    }
}
