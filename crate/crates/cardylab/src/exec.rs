//! Multi-threaded replica executor.

use cardylab_core::exec::Executor;
use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

/// Environment variable that caps the number of worker threads.
pub const THREADS_ENV: &str = "CARDYLAB_THREADS";

/// Runs replicas on a private rayon pool. Counts are integers, so the
/// result does not depend on the number of workers.
pub struct Parallel {
    pool: ThreadPool,
}

impl Parallel {
    pub fn new(threads: usize) -> Self {
        let pool = ThreadPoolBuilder::new().num_threads(threads.max(1)).build().expect("thread pool");
        Parallel { pool }
    }

    /// Uses all cores unless `CARDYLAB_THREADS` holds a positive integer,
    /// which then sets the worker count.
    pub fn from_env() -> Self {
        let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
        let cap = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()).filter(|&n| n > 0);
        Parallel::new(cap.unwrap_or(cores))
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Executor for Parallel {
    fn run<S, I, F>(&self, n: u64, width: usize, init: I, f: F) -> Vec<u64>
    where
        S: Send,
        I: Fn() -> S + Sync + Send,
        F: Fn(&mut S, u64, &mut [u64]) + Sync + Send,
    {
        self.pool.install(|| {
            (0..n)
                .into_par_iter()
                .fold(
                    || (init(), vec![0u64; width]),
                    |(mut state, mut counts), r| {
                        f(&mut state, r, &mut counts);
                        (state, counts)
                    },
                )
                .map(|(_, counts)| counts)
                .reduce(
                    || vec![0u64; width],
                    |mut a, b| {
                        a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                        a
                    },
                )
        })
    }
}
