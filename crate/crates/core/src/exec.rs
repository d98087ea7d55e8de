//! Execution policy for the data-parallel loops (element assembly, error
//! quadrature, sweeps).
//!
//! Every parallel map collects results in input order, and every reduction
//! is done sequentially afterwards, so both policies produce bit-identical
//! output. Without the `parallel` feature, [`Exec::Parallel`] falls back to
//! the sequential path.

/// Environment variable holding the worker count used by the CLI.
pub const WORKERS_ENV: &str = "DTNFEM_WORKERS";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Exec {
    #[default]
    Sequential,
    Parallel,
}

impl Exec {
    /// Policy from `DTNFEM_WORKERS`: more than one worker selects the parallel path.
    pub fn from_env() -> Self {
        if worker_count() > 1 {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }

    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                items.par_iter().map(f).collect()
            }
            _ => items.iter().map(f).collect(),
        }
    }

    pub fn map_range<R, F>(self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                (0..n).into_par_iter().map(f).collect()
            }
            _ => (0..n).map(f).collect(),
        }
    }
}

/// Worker count from `DTNFEM_WORKERS`, default 1.
pub fn worker_count() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or(1)
}

/// Size the global rayon pool from `DTNFEM_WORKERS`. A no-op without the
/// `parallel` feature or when the pool already exists.
pub fn init_global_pool() {
    #[cfg(feature = "parallel")]
    {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(worker_count())
            .build_global();
    }
}
