//! Pairwise-similarity and word-coverage objectives.
//!
//! Both objectives are evaluated either from scratch (`score_*`) or through
//! incremental states that implement [`MarginalGain`] for the greedy.

use serde::{Deserialize, Serialize};

use crate::corpus::DocumentSet;
use crate::error::{Error, Result};
use crate::greedy::MarginalGain;

/// Selected sentence ids in insertion order plus their accumulated byte cost.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    selected: Vec<usize>,
    total_cost: u64,
}

impl Summary {
    /// Appends `id`. Callers guarantee it is not already present.
    pub fn push(&mut self, id: usize, cost: u64) {
        debug_assert!(!self.contains(id));
        self.selected.push(id);
        self.total_cost += cost;
    }

    pub fn contains(&self, id: usize) -> bool {
        self.selected.contains(&id)
    }

    pub fn ids(&self) -> &[usize] {
        &self.selected
    }

    pub fn sorted_ids(&self) -> Vec<usize> {
        let mut ids = self.selected.clone();
        ids.sort_unstable();
        ids
    }

    pub fn total_cost(&self) -> u64 {
        self.total_cost
    }

    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }

    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for &i in &self.selected {
            m[i] = true;
        }
        m
    }

    /// Same members, ignoring insertion order.
    pub fn same_set(&self, other: &Summary) -> bool {
        self.sorted_ids() == other.sorted_ids()
    }
}

/// Dense symmetric similarity matrix with an unused diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SimMatrix {
    n: usize,
    values: Vec<f64>,
}

impl SimMatrix {
    /// Evaluates `f` on `i < j` only and mirrors the result.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let v = f(i, j);
                values[i * n + j] = v;
                values[j * n + i] = v;
            }
        }
        SimMatrix { n, values }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    fn clamped(mut self) -> Self {
        for v in &mut self.values {
            *v = v.max(0.0);
        }
        self
    }
}

/// `F(y) = Σ_{i∉y, j∈y} σ(i,j) − λ Σ_{i,j∈y, i≠j} σ'(i,j)` with `σ' = σ`
/// unless a separate redundancy matrix is supplied.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseScorer {
    cross: SimMatrix,
    redundancy: Option<SimMatrix>,
    lambda: f64,
    clamp_negative: bool,
}

impl PairwiseScorer {
    pub fn new(sigma: SimMatrix, lambda: f64, clamp_negative: bool) -> Self {
        let cross = if clamp_negative { sigma.clamped() } else { sigma };
        PairwiseScorer {
            cross,
            redundancy: None,
            lambda,
            clamp_negative,
        }
    }

    /// Independent similarity for the redundancy term.
    pub fn with_redundancy(mut self, sigma: SimMatrix) -> Self {
        assert_eq!(sigma.len(), self.cross.len(), "matrix sizes differ");
        self.redundancy = Some(if self.clamp_negative { sigma.clamped() } else { sigma });
        self
    }

    /// Hand-tuned baseline: TFIDF-weighted cosine over all words.
    pub fn tfidf_baseline(x: &DocumentSet, lambda: f64) -> Self {
        let vectors: Vec<Vec<(usize, f64)>> = x
            .sentences
            .iter()
            .map(|s| s.terms.iter().map(|&(w, c)| (w, c as f64 * x.idf(w))).collect())
            .collect();
        let sigma = SimMatrix::from_fn(x.len(), |i, j| cosine(&vectors[i], &vectors[j]));
        PairwiseScorer::new(sigma, lambda, true)
    }

    pub fn len(&self) -> usize {
        self.cross.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cross.is_empty()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn clamp_negative(&self) -> bool {
        self.clamp_negative
    }

    pub fn sigma(&self, i: usize, j: usize) -> f64 {
        self.cross.get(i, j)
    }

    fn redundancy(&self) -> &SimMatrix {
        self.redundancy.as_ref().unwrap_or(&self.cross)
    }

    pub fn score(&self, y: &Summary) -> f64 {
        let n = self.len();
        let inside = y.mask(n);
        let red = self.redundancy();
        let mut cross = 0.0;
        let mut redundancy = 0.0;
        for &j in y.ids() {
            for (i, &is_in) in inside.iter().enumerate() {
                if !is_in {
                    cross += self.cross.get(i, j);
                } else if i != j {
                    redundancy += red.get(i, j);
                }
            }
        }
        cross - self.lambda * redundancy
    }

    pub fn state(&self) -> PairwiseState<'_> {
        let n = self.len();
        let row_cross = (0..n)
            .map(|u| (0..n).filter(|&i| i != u).map(|i| self.cross.get(i, u)).sum())
            .collect();
        PairwiseState {
            scorer: self,
            row_cross,
            to_y_cross: vec![0.0; n],
            to_y_red: vec![0.0; n],
        }
    }
}

/// Incremental pairwise objective.
///
/// Adding `u` to `y` changes the cross sum by `Σ_{i∉y, i≠u} σ(i,u) − Σ_{j∈y} σ(u,j)`
/// and the ordered redundancy sum by `2 Σ_{j∈y} σ'(u,j)`.
#[derive(Debug, Clone)]
pub struct PairwiseState<'a> {
    scorer: &'a PairwiseScorer,
    row_cross: Vec<f64>,
    to_y_cross: Vec<f64>,
    to_y_red: Vec<f64>,
}

impl MarginalGain for PairwiseState<'_> {
    fn gain(&self, u: usize) -> f64 {
        self.row_cross[u]
            - 2.0 * self.to_y_cross[u]
            - 2.0 * self.scorer.lambda * self.to_y_red[u]
    }

    fn commit(&mut self, k: usize) {
        let red = self.scorer.redundancy();
        for u in 0..self.row_cross.len() {
            if u != k {
                self.to_y_cross[u] += self.scorer.cross.get(u, k);
                self.to_y_red[u] += red.get(u, k);
            }
        }
    }
}

/// Ground-set-agnostic weighted coverage: element `k` covers `sets[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageSets {
    sets: Vec<Vec<usize>>,
    weights: Vec<f64>,
}

impl CoverageSets {
    pub fn new(mut sets: Vec<Vec<usize>>, weights: Vec<f64>) -> Self {
        for s in &mut sets {
            s.sort_unstable();
            s.dedup();
            assert!(s.iter().all(|&v| v < weights.len()), "word id out of range");
        }
        CoverageSets { sets, weights }
    }

    pub fn state(&self) -> CoverageState<'_> {
        CoverageState {
            sets: self,
            covered: vec![false; self.weights.len()],
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Sum of weights over the union of the covered sets of `ids`.
pub fn score_coverage_sets(sets: &CoverageSets, ids: &[usize]) -> f64 {
    let mut covered = vec![false; sets.weights.len()];
    let mut total = 0.0;
    for &k in ids {
        for &v in &sets.sets[k] {
            if !covered[v] {
                covered[v] = true;
                total += sets.weights[v];
            }
        }
    }
    total
}

#[derive(Debug, Clone)]
pub struct CoverageState<'a> {
    sets: &'a CoverageSets,
    covered: Vec<bool>,
}

impl MarginalGain for CoverageState<'_> {
    fn gain(&self, k: usize) -> f64 {
        self.sets.sets[k]
            .iter()
            .filter(|&&v| !self.covered[v])
            .map(|&v| self.sets.weights[v])
            .sum()
    }

    fn commit(&mut self, k: usize) {
        for &v in &self.sets.sets[k] {
            self.covered[v] = true;
        }
    }
}

/// `F(y) = Σ_{v ∈ V(y)} ω(v)` over the vocabulary of one document set.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageScorer {
    sets: CoverageSets,
    clamp_negative: bool,
}

impl CoverageScorer {
    /// `omega` is indexed by vocabulary id of `x`.
    pub fn new(x: &DocumentSet, omega: Vec<f64>, clamp_negative: bool) -> Self {
        assert_eq!(omega.len(), x.vocabulary.len(), "one weight per vocabulary word");
        let weights = if clamp_negative {
            omega.into_iter().map(|w| w.max(0.0)).collect()
        } else {
            omega
        };
        let sets = x
            .sentences
            .iter()
            .map(|s| s.terms.iter().map(|&(w, _)| w).collect())
            .collect();
        CoverageScorer {
            sets: CoverageSets::new(sets, weights),
            clamp_negative,
        }
    }

    pub fn omega(&self, word_id: usize) -> f64 {
        self.sets.weights[word_id]
    }

    pub fn clamp_negative(&self) -> bool {
        self.clamp_negative
    }

    pub fn score(&self, y: &Summary) -> f64 {
        score_coverage_sets(&self.sets, y.ids())
    }

    pub fn state(&self) -> CoverageState<'_> {
        self.sets.state()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Scorer {
    Pairwise(PairwiseScorer),
    Coverage(CoverageScorer),
}

pub enum ScorerState<'a> {
    Pairwise(PairwiseState<'a>),
    Coverage(CoverageState<'a>),
}

impl MarginalGain for ScorerState<'_> {
    fn gain(&self, k: usize) -> f64 {
        match self {
            ScorerState::Pairwise(s) => s.gain(k),
            ScorerState::Coverage(s) => s.gain(k),
        }
    }

    fn commit(&mut self, k: usize) {
        match self {
            ScorerState::Pairwise(s) => s.commit(k),
            ScorerState::Coverage(s) => s.commit(k),
        }
    }
}

impl Scorer {
    pub fn score(&self, y: &Summary) -> f64 {
        match self {
            Scorer::Pairwise(s) => s.score(y),
            Scorer::Coverage(s) => s.score(y),
        }
    }

    pub fn state(&self) -> ScorerState<'_> {
        match self {
            Scorer::Pairwise(s) => ScorerState::Pairwise(s.state()),
            Scorer::Coverage(s) => ScorerState::Coverage(s.state()),
        }
    }
}

fn check_summary(x: &DocumentSet, y: &Summary) {
    debug_assert!(y.ids().iter().all(|&i| i < x.len()), "summary not a subset of x");
}

pub fn score_pairwise(x: &DocumentSet, y: &Summary, s: &PairwiseScorer) -> f64 {
    check_summary(x, y);
    s.score(y)
}

pub fn score_coverage(x: &DocumentSet, y: &Summary, s: &CoverageScorer) -> f64 {
    check_summary(x, y);
    s.score(y)
}

/// `F(y ∪ {k}) − F(y)`, computed through the incremental state.
pub fn marginal_gain(x: &DocumentSet, y: &Summary, k: usize, scorer: &Scorer) -> Result<f64> {
    x.check_id(k)?;
    if y.contains(k) {
        return Err(Error::AlreadySelected(k));
    }
    let mut state = scorer.state();
    for &j in y.ids() {
        state.commit(j);
    }
    Ok(state.gain(k))
}

/// Cosine between two sparse vectors sorted by index; 0 when either is zero.
pub fn cosine(a: &[(usize, f64)], b: &[(usize, f64)]) -> f64 {
    let norm_a = a.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
    let norm_b = b.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
    if norm_a == 0.0 || norm_b == 0.0 {
        return 0.0;
    }
    sparse_dot(a, b) / (norm_a * norm_b)
}

pub(crate) fn sparse_dot(a: &[(usize, f64)], b: &[(usize, f64)]) -> f64 {
    let (mut i, mut j, mut dot) = (0, 0, 0.0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                dot += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    dot
}
