//! Replica execution. Estimators hand a per-replica closure to an
//! [`Executor`]; results are integer counts, so any summation order gives
//! the same answer.

use alloc::vec;
use alloc::vec::Vec;

pub trait Executor: Sync {
    /// Calls `f(state, replica, counts)` for every replica in `0..n` and
    /// returns the element-wise sum of `counts` (each of length `width`).
    /// `init` builds one scratch state per worker.
    fn run<S, I, F>(&self, n: u64, width: usize, init: I, f: F) -> Vec<u64>
    where
        S: Send,
        I: Fn() -> S + Sync + Send,
        F: Fn(&mut S, u64, &mut [u64]) + Sync + Send;
}

/// Runs every replica on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Serial;

impl Executor for Serial {
    fn run<S, I, F>(&self, n: u64, width: usize, init: I, f: F) -> Vec<u64>
    where
        S: Send,
        I: Fn() -> S + Sync + Send,
        F: Fn(&mut S, u64, &mut [u64]) + Sync + Send,
    {
        let mut state = init();
        let mut counts = vec![0u64; width];
        for r in 0..n {
            f(&mut state, r, &mut counts);
        }
        counts
    }
}
