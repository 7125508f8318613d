//! Multi-threaded trial sampling.

use std::thread;

use qinterf_core::sampling::{merge, partition, sample_range, Categorical, TrialSampler};

/// Splits trials into `workers` contiguous ranges, one scoped thread each.
/// Every trial draws from its own substream, so merged counts do not depend
/// on the worker count.
#[derive(Debug, Clone, Copy)]
pub struct ThreadedSampler {
    pub workers: usize,
}

impl TrialSampler for ThreadedSampler {
    fn sample(&self, dist: &Categorical, n_trials: u64, seed: u64) -> Vec<u64> {
        let ranges = partition(n_trials, self.workers.max(1));
        if ranges.len() <= 1 {
            return merge(ranges.into_iter().map(|r| sample_range(dist, seed, r)), dist.len());
        }
        thread::scope(|s| {
            let handles: Vec<_> = ranges
                .into_iter()
                .map(|r| s.spawn(move || sample_range(dist, seed, r)))
                .collect();
            merge(
                handles.into_iter().map(|h| h.join().expect("sampling thread panicked")),
                dist.len(),
            )
        })
    }
}

/// Maps `f` over `0..n` on up to `workers` threads, preserving index order.
pub fn par_map<T, F>(n: u64, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync,
{
    let ranges = partition(n, workers.max(1));
    if ranges.len() <= 1 {
        return (0..n).map(&f).collect();
    }
    let f = &f;
    thread::scope(|s| {
        let handles: Vec<_> = ranges
            .into_iter()
            .map(|r| s.spawn(move || r.map(f).collect::<Vec<T>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker thread panicked"))
            .collect()
    })
}
