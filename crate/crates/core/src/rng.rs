//! Labelled random substreams derived from a single root seed.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Consumers of randomness; each gets its own ChaCha stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Dataset = 1,
    Embedding = 2,
    Testing = 3,
}

pub fn substream(seed: u64, stream: Stream) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}
