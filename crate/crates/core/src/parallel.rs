//! Data-parallel helpers. With the `parallel` feature (on by default) work
//! items run on rayon; without it everything runs sequentially on the caller's
//! thread. Results are always returned in index order, so outputs never depend
//! on scheduling.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parallelism {
    Sequential,
    /// A dedicated pool of this many threads.
    Threads(usize),
    /// Rayon's global pool.
    #[default]
    Auto,
}

impl Parallelism {
    pub fn from_threads(threads: usize) -> Self {
        match threads {
            0 => Self::Auto,
            1 => Self::Sequential,
            n => Self::Threads(n),
        }
    }
}

/// Evaluates `f(0..count)` and collects the results in index order.
#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(count: usize, parallelism: Parallelism, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;

    match parallelism {
        Parallelism::Sequential => (0..count).map(f).collect(),
        Parallelism::Auto => (0..count).into_par_iter().map(f).collect(),
        Parallelism::Threads(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| (0..count).into_par_iter().map(&f).collect()),
            Err(_) => (0..count).map(f).collect(),
        },
    }
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(count: usize, _parallelism: Parallelism, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..count).map(f).collect()
}

/// True when the crate was built with rayon support.
pub const fn is_parallel_enabled() -> bool {
    cfg!(feature = "parallel")
}
