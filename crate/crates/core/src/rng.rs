//! Seeded random streams.
//!
//! Every stream is derived from a root seed and a worker (or batch) index, so a
//! computation split into fixed batches gives the same answer regardless of how
//! many threads execute the batches.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Independent stream number `index` of the generator seeded by `root`.
pub fn stream(root: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(root);
    rng.set_stream(index);
    rng
}
