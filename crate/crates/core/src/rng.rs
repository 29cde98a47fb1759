//! Seeded random streams.
//!
//! Every random quantity in the crate is drawn from a ChaCha8 generator
//! addressed by `(seed, stream)`. Replications and Monte Carlo chunks get
//! their own stream, so results do not depend on scheduling or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub type StreamRng = ChaCha8Rng;

/// Generator for stream `stream` of master seed `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draws per Monte Carlo chunk.
pub const CHUNK: usize = 1 << 16;

/// Splits `total` draws into fixed chunks of [`CHUNK`], runs `f(len, rng)` on
/// each chunk in parallel with the chunk's own stream and returns the results
/// in chunk order. Reductions over the returned vector are deterministic.
pub fn map_chunks<T, F>(total: usize, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut StreamRng) -> T + Sync,
{
    let chunks = total.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let len = CHUNK.min(total - c * CHUNK);
            let mut rng = stream_rng(seed, c as u64);
            f(len, &mut rng)
        })
        .collect()
}
