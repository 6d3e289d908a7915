//! Simplified ROUGE-1 F, the losses built on it, and target summaries.
//!
//! The metric is clipped unigram overlap on normalized tokens, with no
//! stemming, β = 1, and several references combined by averaging the
//! per-reference scores.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::{DocumentSet, ReferenceSet, Token};
use crate::error::{Error, Result};
use crate::greedy::{greedy_maximize, GreedyConfig, MarginalGain};
use crate::scoring::Summary;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregation {
    /// Average the F score over references.
    #[default]
    MeanF,
    /// Average `1 − F` over references.
    MeanLoss,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LossConfig {
    pub aggregation: Aggregation,
    pub rouge_stopword_removal: bool,
    /// Score against the first reference only.
    #[serde(default)]
    pub single_reference: bool,
}

/// Multiset of normalized words.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UnigramCounts {
    counts: BTreeMap<String, u32>,
    total: u64,
}

impl UnigramCounts {
    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut counts = UnigramCounts::default();
        for w in words {
            counts.add(w.into(), 1);
        }
        counts
    }

    pub fn from_tokens<'a>(tokens: impl IntoIterator<Item = &'a Token>, cfg: &LossConfig) -> Self {
        UnigramCounts::from_words(
            tokens
                .into_iter()
                .filter(|t| !(cfg.rouge_stopword_removal && t.is_stopword))
                .map(|t| t.normalized.clone()),
        )
    }

    /// Tokens of the selected sentences.
    pub fn from_summary(x: &DocumentSet, y: &Summary, cfg: &LossConfig) -> Result<Self> {
        let mut tokens = Vec::new();
        for &k in y.ids() {
            x.check_id(k)?;
            tokens.extend(&x.sentences[k].tokens);
        }
        Ok(UnigramCounts::from_tokens(tokens, cfg))
    }

    fn add(&mut self, word: String, n: u32) {
        if n > 0 {
            *self.counts.entry(word).or_default() += n;
            self.total += n as u64;
        }
    }

    pub fn get(&self, word: &str) -> u32 {
        self.counts.get(word).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u32)> {
        self.counts.iter().map(|(w, &c)| (w.as_str(), c))
    }

    /// `Σ_v min(self[v], other[v])`.
    pub fn overlap(&self, other: &UnigramCounts) -> u64 {
        let (small, large) = if self.counts.len() <= other.counts.len() {
            (self, other)
        } else {
            (other, self)
        };
        small
            .iter()
            .map(|(w, c)| c.min(large.get(w)) as u64)
            .sum()
    }
}

/// Precision, recall and F averaged over references.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f: f64,
}

fn prf(overlap: u64, candidate_total: u64, reference_total: u64) -> Prf {
    if overlap == 0 {
        return Prf::default();
    }
    let p = overlap as f64 / candidate_total as f64;
    let r = overlap as f64 / reference_total as f64;
    Prf {
        precision: p,
        recall: r,
        // equals 2PR/(P+R) with one rounding step
        f: 2.0 * overlap as f64 / (candidate_total + reference_total) as f64,
    }
}

fn check_references(references: &[UnigramCounts]) -> Result<()> {
    if references.is_empty() || references.iter().any(UnigramCounts::is_empty) {
        return Err(Error::EmptyReferences);
    }
    Ok(())
}

/// Mean per-reference P, R and F.
pub fn rouge1_prf(candidate: &UnigramCounts, references: &[UnigramCounts]) -> Result<Prf> {
    check_references(references)?;
    let mut sum = Prf::default();
    for r in references {
        let s = prf(candidate.overlap(r), candidate.total(), r.total());
        sum.precision += s.precision;
        sum.recall += s.recall;
        sum.f += s.f;
    }
    let n = references.len() as f64;
    Ok(Prf {
        precision: sum.precision / n,
        recall: sum.recall / n,
        f: sum.f / n,
    })
}

/// ROUGE-1 F in `[0, 1]`.
///
/// Both aggregation modes average the per-reference F; they only differ in
/// how the loss is formed, and since every F lies in `[0, 1]` the floor at 0
/// never binds, so the losses agree as well.
pub fn rouge1_f(candidate: &UnigramCounts, references: &[UnigramCounts], _cfg: &LossConfig) -> Result<f64> {
    Ok(rouge1_prf(candidate, references)?.f)
}

/// Reference multisets used for scoring under `cfg`.
pub fn reference_counts(refs: &ReferenceSet, cfg: &LossConfig) -> Result<Vec<UnigramCounts>> {
    let take = if cfg.single_reference { 1 } else { refs.references.len() };
    if take == 0 {
        return Err(Error::NoReferences(refs.set_id.clone()));
    }
    let counts: Vec<UnigramCounts> = refs.references[..take]
        .iter()
        .map(|r| UnigramCounts::from_tokens(r, cfg))
        .collect();
    check_references(&counts)?;
    Ok(counts)
}

/// ROUGE-1 P/R/F of an extractive summary of `x` against `refs`.
pub fn evaluate_summary(refs: &ReferenceSet, y: &Summary, x: &DocumentSet, cfg: &LossConfig) -> Result<Prf> {
    rouge1_prf(&UnigramCounts::from_summary(x, y, cfg)?, &reference_counts(refs, cfg)?)
}

/// `Δ_R(Y, y) = max(0, 1 − ROUGE-1 F)`.
pub fn loss_delta_r(refs: &ReferenceSet, y: &Summary, x: &DocumentSet, cfg: &LossConfig) -> Result<f64> {
    let candidate = UnigramCounts::from_summary(x, y, cfg)?;
    let f = rouge1_f(&candidate, &reference_counts(refs, cfg)?, cfg)?;
    Ok((1.0 - f).max(0.0))
}

/// Loss relative to the target: `max(0, Δ_R(ŷ) − Δ_R(target))`.
pub fn loss_delta(refs: &ReferenceSet, y_hat: &Summary, x: &DocumentSet, cfg: &LossConfig) -> Result<f64> {
    let target = refs
        .target
        .as_ref()
        .ok_or_else(|| Error::MissingTarget(refs.set_id.clone()))?;
    let base = loss_delta_r(refs, target, x, cfg)?;
    Ok((loss_delta_r(refs, y_hat, x, cfg)? - base).max(0.0))
}

/// Incremental ROUGE-1 F of a growing extractive summary.
///
/// `gain(k)` is the change in mean F when sentence `k` is added.
#[derive(Debug, Clone)]
pub struct RougeState {
    /// Per sentence: (word slot, count).
    sentence_counts: Vec<Vec<(usize, u32)>>,
    /// Per reference: count per word slot.
    references: Vec<Vec<u32>>,
    reference_totals: Vec<u64>,
    candidate: Vec<u32>,
    candidate_total: u64,
    overlaps: Vec<u64>,
    f: f64,
}

impl RougeState {
    pub fn new(x: &DocumentSet, refs: &ReferenceSet, cfg: &LossConfig) -> Result<Self> {
        let reference_counts = reference_counts(refs, cfg)?;
        let mut slots: HashMap<String, usize> = HashMap::new();
        let mut slot = |w: &str| {
            let next = slots.len();
            *slots.entry(w.to_string()).or_insert(next)
        };
        let sentence_counts: Vec<Vec<(usize, u32)>> = x
            .sentences
            .iter()
            .map(|s| {
                UnigramCounts::from_tokens(&s.tokens, cfg)
                    .iter()
                    .map(|(w, c)| (slot(w), c))
                    .collect()
            })
            .collect();
        let per_ref: Vec<Vec<(usize, u32)>> = reference_counts
            .iter()
            .map(|r| r.iter().map(|(w, c)| (slot(w), c)).collect())
            .collect();
        let width = slots.len();
        let references = per_ref
            .into_iter()
            .map(|pairs| {
                let mut dense = vec![0; width];
                for (s, c) in pairs {
                    dense[s] = c;
                }
                dense
            })
            .collect();
        Ok(RougeState {
            sentence_counts,
            references,
            reference_totals: reference_counts.iter().map(UnigramCounts::total).collect(),
            candidate: vec![0; width],
            candidate_total: 0,
            overlaps: vec![0; reference_counts.len()],
            f: 0.0,
        })
    }

    /// Mean F of the current summary.
    pub fn f(&self) -> f64 {
        self.f
    }

    fn f_with(&self, k: usize) -> f64 {
        let added = &self.sentence_counts[k];
        let total = self.candidate_total + added.iter().map(|&(_, c)| c as u64).sum::<u64>();
        let mut sum = 0.0;
        for (r, reference) in self.references.iter().enumerate() {
            let mut overlap = self.overlaps[r];
            for &(s, c) in added {
                let cur = self.candidate[s];
                overlap += (cur + c).min(reference[s]) as u64 - cur.min(reference[s]) as u64;
            }
            sum += prf(overlap, total, self.reference_totals[r]).f;
        }
        sum / self.references.len() as f64
    }
}

impl MarginalGain for RougeState {
    fn gain(&self, k: usize) -> f64 {
        self.f_with(k) - self.f
    }

    fn commit(&mut self, k: usize) {
        self.f = self.f_with(k);
        for &(s, c) in &self.sentence_counts[k] {
            for (r, reference) in self.references.iter().enumerate() {
                let cur = self.candidate[s];
                self.overlaps[r] += (cur + c).min(reference[s]) as u64 - cur.min(reference[s]) as u64;
            }
            self.candidate[s] += c;
            self.candidate_total += c as u64;
        }
    }
}

/// Incremental `Δ` for loss-augmented inference.
#[derive(Debug, Clone)]
pub struct LossState {
    rouge: RougeState,
    target_f: f64,
}

impl LossState {
    pub fn new(x: &DocumentSet, refs: &ReferenceSet, cfg: &LossConfig) -> Result<Self> {
        let target = refs
            .target
            .as_ref()
            .ok_or_else(|| Error::MissingTarget(refs.set_id.clone()))?;
        let mut probe = RougeState::new(x, refs, cfg)?;
        let rouge = probe.clone();
        for &k in target.ids() {
            x.check_id(k)?;
            probe.commit(k);
        }
        Ok(LossState {
            rouge,
            target_f: probe.f(),
        })
    }

    fn loss_at(&self, f: f64) -> f64 {
        (self.target_f - f).max(0.0)
    }

    /// `Δ` of the current summary.
    pub fn loss(&self) -> f64 {
        self.loss_at(self.rouge.f())
    }
}

impl MarginalGain for LossState {
    fn gain(&self, k: usize) -> f64 {
        self.loss_at(self.rouge.f_with(k)) - self.loss()
    }

    fn commit(&mut self, k: usize) {
        self.rouge.commit(k);
    }
}

/// Greedy ROUGE-maximizing extractive summary, stored as `refs.target`.
///
/// A budget carried by `x` takes precedence over `greedy.budget_bytes`.
pub fn make_target(
    x: &DocumentSet,
    refs: &mut ReferenceSet,
    greedy: &GreedyConfig,
    loss: &LossConfig,
) -> Result<Summary> {
    let greedy = greedy.for_set(x);
    let mut state = RougeState::new(x, refs, loss)?;
    let target = greedy_maximize(&x.costs(), &mut state, &greedy);
    if target.is_empty() {
        log::warn!(
            "target summary for set {:?} is empty (budget {} bytes)",
            refs.set_id,
            greedy.budget_bytes
        );
    }
    refs.target = Some(target.clone());
    Ok(target)
}
