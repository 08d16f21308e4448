//! Seeded random streams.
//!
//! Every random draw in the crate comes from ChaCha20. Independent tasks (Monte Carlo
//! chains, shot batches at different grid points) use the same 64-bit master seed with
//! different stream numbers, so results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type Rng = ChaCha20Rng;

/// Generator for `stream` under `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream number for task `task` at grid point `grid_index`.
pub fn task_stream(grid_index: usize, task: usize) -> u64 {
    ((grid_index as u64) << 32) | task as u64
}
