//! Budgeted greedy maximization with a cost-scaled selection rule.

use serde::{Deserialize, Serialize};

use crate::corpus::DocumentSet;
use crate::error::{Error, Result};
use crate::scoring::Summary;

/// Largest ground set [`exhaustive_maximize`] accepts.
pub const EXHAUSTIVE_MAX: usize = 20;

/// Incremental marginal-gain oracle driven by [`greedy_maximize`].
///
/// `gain(k)` is `F(y ∪ {k}) − F(y)` for the summary `y` built from every
/// `commit` so far.
pub trait MarginalGain {
    fn gain(&self, candidate: usize) -> f64;
    fn commit(&mut self, candidate: usize);
}

impl<G: MarginalGain + ?Sized> MarginalGain for &mut G {
    fn gain(&self, candidate: usize) -> f64 {
        (**self).gain(candidate)
    }

    fn commit(&mut self, candidate: usize) {
        (**self).commit(candidate)
    }
}

/// Sum of two objectives, e.g. model score plus loss.
pub struct SumGain<A, B>(pub A, pub B);

impl<A: MarginalGain, B: MarginalGain> MarginalGain for SumGain<A, B> {
    fn gain(&self, candidate: usize) -> f64 {
        self.0.gain(candidate) + self.1.gain(candidate)
    }

    fn commit(&mut self, candidate: usize) {
        self.0.commit(candidate);
        self.1.commit(candidate);
    }
}

/// Adapts a non-incremental `(current summary, candidate) -> gain` closure.
pub struct FnGain<F> {
    f: F,
    costs: Vec<u64>,
    current: Summary,
}

impl<F: Fn(&Summary, usize) -> f64> FnGain<F> {
    pub fn new(costs: &[u64], f: F) -> Self {
        FnGain {
            f,
            costs: costs.to_vec(),
            current: Summary::default(),
        }
    }
}

impl<F: Fn(&Summary, usize) -> f64> MarginalGain for FnGain<F> {
    fn gain(&self, candidate: usize) -> f64 {
        (self.f)(&self.current, candidate)
    }

    fn commit(&mut self, candidate: usize) {
        self.current.push(candidate, self.costs[candidate]);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieBreak {
    #[default]
    LowestId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreedyConfig {
    pub budget_bytes: u64,
    /// Exponent on the sentence cost in the selection ratio, in `(0, 1]`.
    pub r: f64,
    #[serde(default)]
    pub tie_break: TieBreak,
}

impl Default for GreedyConfig {
    fn default() -> Self {
        GreedyConfig {
            budget_bytes: 665,
            r: 0.3,
            tie_break: TieBreak::LowestId,
        }
    }
}

impl GreedyConfig {
    pub fn with_budget(mut self, budget_bytes: u64) -> Self {
        self.budget_bytes = budget_bytes;
        self
    }

    pub fn with_r(mut self, r: f64) -> Self {
        self.r = r;
        self
    }

    /// The configuration for one document set: a budget stored on the set
    /// replaces the configured one.
    pub fn for_set(&self, x: &DocumentSet) -> GreedyConfig {
        self.clone().with_budget(x.budget_bytes.unwrap_or(self.budget_bytes))
    }
}

/// Greedy summary construction.
///
/// Every sentence is examined exactly once: the candidate with the largest
/// `gain / cost^r` is removed from the pool and kept only if it fits in the
/// remaining budget and its gain is non-negative. Equal ratios resolve to the
/// lowest sentence id.
pub fn greedy_maximize<G: MarginalGain + ?Sized>(
    costs: &[u64],
    gain: &mut G,
    cfg: &GreedyConfig,
) -> Summary {
    let mut pool: Vec<usize> = (0..costs.len()).collect();
    let mut summary = Summary::default();
    let scale: Vec<f64> = costs.iter().map(|&c| (c as f64).powf(cfg.r)).collect();

    while !pool.is_empty() {
        let mut best_slot = 0;
        let mut best_gain = f64::NAN;
        let mut best_ratio = f64::NEG_INFINITY;
        // pool stays sorted, so a strict comparison keeps the lowest id on ties
        for (slot, &k) in pool.iter().enumerate() {
            let g = gain.gain(k);
            let ratio = g / scale[k];
            if slot == 0 || ratio > best_ratio {
                best_slot = slot;
                best_gain = g;
                best_ratio = if ratio.is_nan() { f64::NEG_INFINITY } else { ratio };
            }
        }
        let k = pool.remove(best_slot);
        if summary.total_cost() + costs[k] <= cfg.budget_bytes && best_gain >= 0.0 {
            gain.commit(k);
            summary.push(k, costs[k]);
        }
    }
    summary
}

/// Exact maximum of `score` over all budget-feasible subsets.
///
/// Test oracle only. Ties keep the subset enumerated first (bitmask order).
pub fn exhaustive_maximize<F: Fn(&Summary) -> f64>(
    costs: &[u64],
    score: F,
    cfg: &GreedyConfig,
) -> Result<(Summary, f64)> {
    let n = costs.len();
    if n > EXHAUSTIVE_MAX {
        return Err(Error::TooManySentences {
            n,
            max: EXHAUSTIVE_MAX,
        });
    }
    let mut best = (Summary::default(), score(&Summary::default()));
    for mask in 1u32..(1u32 << n) {
        let total: u64 = (0..n)
            .filter(|&i| mask & (1 << i) != 0)
            .map(|i| costs[i])
            .sum();
        if total > cfg.budget_bytes {
            continue;
        }
        let mut y = Summary::default();
        for i in (0..n).filter(|&i| mask & (1 << i) != 0) {
            y.push(i, costs[i]);
        }
        let value = score(&y);
        if value > best.1 {
            best = (y, value);
        }
    }
    Ok(best)
}
