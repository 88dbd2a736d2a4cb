//! Per-sample seeding and the worker pool.
//!
//! Sample `i` of a run with master seed `s` draws from its own generator,
//! seeded by mixing `(s, stream, i)`. Results therefore do not depend on the
//! number of threads or on the order in which samples are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// One round of the SplitMix64 finaliser.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of sample `index` in the sub-stream `stream` of a run.
///
/// Sub-streams keep independent parts of one experiment (say, two horizons
/// simulated separately) from reusing the same points.
pub fn derive_seed(master: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ stream) ^ index)
}

pub fn sample_rng(master: u64, stream: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, stream, index))
}

/// A worker pool with `threads` threads, or one per core when `None`.
pub fn pool(threads: Option<usize>) -> Result<rayon::ThreadPool, rayon::ThreadPoolBuildError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t.max(1));
    }
    builder.build()
}

/// `f(0), …, f(count - 1)` evaluated in parallel, returned in index order.
pub fn par_map<T, F>(pool: &rayon::ThreadPool, count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    pool.install(|| (0..count).into_par_iter().map(&f).collect())
}

/// Like [`par_map`] but over contiguous chunks, for work that batches
/// samples internally. `f(start, end)` must return `end - start` items.
pub fn par_chunks<T, F>(pool: &rayon::ThreadPool, count: usize, chunk: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, usize) -> Vec<T> + Sync + Send,
{
    let chunk = chunk.max(1);
    let starts: Vec<usize> = (0..count).step_by(chunk).collect();
    let parts: Vec<Vec<T>> = pool.install(|| {
        starts
            .par_iter()
            .map(|&s| {
                let e = (s + chunk).min(count);
                let part = f(s, e);
                debug_assert_eq!(part.len(), e - s);
                part
            })
            .collect()
    });
    parts.into_iter().flatten().collect()
}
