//! Monte Carlo sampling of joint detector outcomes.
//!
//! Trial `t` draws its uniform variate from words `2t, 2t+1` of the
//! [`EVENT_STREAM`](crate::rng::EVENT_STREAM) ChaCha8 stream keyed by the
//! run seed. The substream for a block of trials is therefore fixed by
//! `(seed, first trial index)`, and splitting the trials across any number of
//! workers and adding their counts gives the same result.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use crate::detection::{JointOutcome, OutcomePovm};
use crate::error::{Error, Result};
use crate::hilbert::StateVector;
use crate::rng::{self, EVENT_STREAM};

/// Probabilities must sum to one within this slack before normalization.
pub const TAU_DISTRIBUTION: f64 = 1e-9;

/// Categorical distribution prepared for inverse-CDF sampling. Outcomes of
/// probability zero are never drawn.
#[derive(Debug, Clone, PartialEq)]
pub struct Categorical {
    cumulative: Vec<f64>,
}

impl Categorical {
    pub fn new(probabilities: &[f64]) -> Result<Self> {
        if probabilities.iter().any(|p| p.is_nan() || *p < 0.0) {
            return Err(Error::DegenerateDistribution { total: f64::NAN });
        }
        let total: f64 = probabilities.iter().sum();
        if total.is_nan() || (total - 1.0).abs() > TAU_DISTRIBUTION {
            return Err(Error::DegenerateDistribution { total });
        }
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = probabilities
            .iter()
            .map(|p| {
                acc += p / total;
                acc
            })
            .collect();
        let last = probabilities.iter().rposition(|&p| p > 0.0).expect("total is one");
        cumulative[last..].iter_mut().for_each(|c| *c = 1.0);
        Ok(Self { cumulative })
    }

    pub fn len(&self) -> usize {
        self.cumulative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cumulative.is_empty()
    }

    /// Index of the outcome selected by `u` in `[0, 1)`.
    pub fn draw(&self, u: f64) -> usize {
        self.cumulative.partition_point(|&c| c <= u)
    }
}

/// Counts for trials `range` of the run keyed by `seed`.
pub fn sample_range(dist: &Categorical, seed: u64, range: Range<u64>) -> Vec<u64> {
    let mut counts = vec![0u64; dist.len()];
    if range.is_empty() {
        return counts;
    }
    let mut rng = rng::trial_stream(seed, EVENT_STREAM, range.start);
    for _ in range {
        counts[dist.draw(rng::unit_interval(&mut rng))] += 1;
    }
    counts
}

/// Splits `0..n_trials` into `workers` contiguous ranges of near-equal size.
pub fn partition(n_trials: u64, workers: usize) -> Vec<Range<u64>> {
    let workers = workers.max(1) as u64;
    let base = n_trials / workers;
    let extra = n_trials % workers;
    let mut start = 0;
    (0..workers)
        .map(|w| {
            let len = base + u64::from(w < extra);
            let r = start..start + len;
            start += len;
            r
        })
        .collect()
}

/// Strategy for executing a batch of trials.
pub trait TrialSampler {
    fn sample(&self, dist: &Categorical, n_trials: u64, seed: u64) -> Vec<u64>;
}

/// All trials on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl TrialSampler for Sequential {
    fn sample(&self, dist: &Categorical, n_trials: u64, seed: u64) -> Vec<u64> {
        sample_range(dist, seed, 0..n_trials)
    }
}

/// Trials split into `workers` ranges, executed one after another and merged.
#[derive(Debug, Clone, Copy)]
pub struct Partitioned {
    pub workers: usize,
}

impl TrialSampler for Partitioned {
    fn sample(&self, dist: &Categorical, n_trials: u64, seed: u64) -> Vec<u64> {
        merge(
            partition(n_trials, self.workers)
                .into_iter()
                .map(|r| sample_range(dist, seed, r)),
            dist.len(),
        )
    }
}

/// Elementwise sum of per-worker counts.
pub fn merge(parts: impl IntoIterator<Item = Vec<u64>>, len: usize) -> Vec<u64> {
    parts.into_iter().fold(vec![0; len], |mut acc, part| {
        acc.iter_mut().zip(part).for_each(|(a, c)| *a += c);
        acc
    })
}

/// Sampled counts per joint outcome.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct EventCounts {
    pub outcomes: Vec<JointOutcome>,
    pub probabilities: Vec<f64>,
    pub counts: Vec<u64>,
    pub n_trials: u64,
    pub seed: u64,
}

impl EventCounts {
    pub fn count(&self, outcome: &JointOutcome) -> Option<u64> {
        self.outcomes.iter().position(|o| o == outcome).map(|i| self.counts[i])
    }

    /// Count of the outcome in which every detector fired.
    pub fn coincidences(&self) -> u64 {
        self.outcomes
            .iter()
            .zip(&self.counts)
            .filter(|(o, _)| o.all_fired())
            .map(|(_, &c)| c)
            .sum()
    }
}

/// Draws `n_trials` joint outcomes for `state` on the calling thread.
pub fn sample_events(povm: &OutcomePovm, state: &StateVector, n_trials: u64, seed: u64) -> Result<EventCounts> {
    sample_events_with(povm, state, n_trials, seed, &Sequential)
}

pub fn sample_events_with(
    povm: &OutcomePovm,
    state: &StateVector,
    n_trials: u64,
    seed: u64,
    sampler: &dyn TrialSampler,
) -> Result<EventCounts> {
    let probabilities = povm.probabilities(state)?;
    let dist = Categorical::new(&probabilities)?;
    let counts = sampler.sample(&dist, n_trials, seed);
    Ok(EventCounts {
        outcomes: povm.outcomes().iter().map(|(o, _)| o.clone()).collect(),
        probabilities,
        counts,
        n_trials,
        seed,
    })
}
