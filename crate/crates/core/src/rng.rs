// SPDX-License-Identifier: MIT OR Apache-2.0

//! Seeding and replicate-parallel execution.
//!
//! Every replicate `r` of a study draws from ChaCha8 keyed by the master seed
//! on stream `r`, so results depend only on `(seed, r)` and never on the
//! number of worker threads or on completion order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Generator tag written into every persisted artifact.
pub const GENERATOR: &str = "chacha8-stream/rand_chacha-0.9/rand_distr-0.5";

pub type Rng = ChaCha8Rng;

/// Generator for replicate `replicate` under master seed `seed`.
pub fn replicate_rng(seed: u64, replicate: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}

/// Runs `f` once per replicate on the ambient rayon pool and returns the
/// results in replicate order.
pub fn par_replicates<T, F>(reps: usize, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut Rng) -> T + Sync,
{
    (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_rng(seed, r as u64);
            f(r, &mut rng)
        })
        .collect()
}
