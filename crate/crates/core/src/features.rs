//! Word-group features for sentence pairs and words, and the joint feature
//! maps built from them.
//!
//! Every feature belongs to a *word group* (all words, capitalized words,
//! frequent words, ...). A group is refined into variants by thresholds, and
//! each variant yields a fixed block of features whose layout depends only on
//! the [`FeatureConfig`], never on the data. Indices are therefore stable
//! across document sets and models stay portable.
//!
//! Pairwise features are cosine similarities between two sentences restricted
//! to the words of one variant (plus 0.1-wide bin indicators of that cosine).
//! Location is attached to sentences in the pairwise space and to the
//! earliest position of a word in the coverage space.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::DocumentSet;
use crate::error::{Error, Result};
use crate::scoring::{sparse_dot, SimMatrix, Summary};

/// Sparse feature vector with sorted, non-zero, finite entries.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureVector {
    dim: usize,
    entries: Vec<(usize, f64)>,
}

impl FeatureVector {
    pub fn zeros(dim: usize) -> Self {
        FeatureVector {
            dim,
            entries: Vec::new(),
        }
    }

    /// Sorts, merges duplicate indices and drops zeros.
    pub fn from_entries(dim: usize, entries: impl IntoIterator<Item = (usize, f64)>) -> Self {
        let mut map: BTreeMap<usize, f64> = BTreeMap::new();
        for (i, v) in entries {
            assert!(i < dim, "feature index {i} out of range {dim}");
            *map.entry(i).or_default() += v;
        }
        FeatureVector {
            dim,
            entries: map.into_iter().filter(|&(_, v)| v != 0.0).collect(),
        }
    }

    pub fn from_dense(values: &[f64]) -> Self {
        FeatureVector {
            dim: values.len(),
            entries: values
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != 0.0)
                .map(|(i, &v)| (i, v))
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, index: usize) -> f64 {
        self.entries
            .binary_search_by_key(&index, |&(i, _)| i)
            .map(|p| self.entries[p].1)
            .unwrap_or(0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|(_, v)| v.is_finite())
    }

    /// Inner product with a dense weight vector.
    pub fn dot(&self, w: &[f64]) -> f64 {
        self.entries.iter().map(|&(i, v)| w[i] * v).sum()
    }

    pub fn dot_sparse(&self, other: &FeatureVector) -> f64 {
        sparse_dot(&self.entries, &other.entries)
    }

    pub fn norm_sq(&self) -> f64 {
        self.entries.iter().map(|(_, v)| v * v).sum()
    }

    /// `acc += scale * self`.
    pub fn add_to(&self, acc: &mut [f64], scale: f64) {
        for &(i, v) in &self.entries {
            acc[i] += scale * v;
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.add_to(&mut out, 1.0);
        out
    }

    pub fn sub(&self, other: &FeatureVector) -> FeatureVector {
        FeatureVector::from_entries(
            self.dim.max(other.dim),
            self.entries
                .iter()
                .copied()
                .chain(other.entries.iter().map(|&(i, v)| (i, -v))),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Group {
    #[serde(rename = "basic")]
    Basic,
    #[serde(rename = "cap+stop+len")]
    CapStopLen,
    #[serde(rename = "location")]
    Location,
    #[serde(rename = "minmax")]
    MinMax,
    #[serde(rename = "sent+doc")]
    SentDoc,
}

impl Group {
    pub const ALL: [Group; 5] = [
        Group::Basic,
        Group::CapStopLen,
        Group::Location,
        Group::MinMax,
        Group::SentDoc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Group::Basic => "basic",
            Group::CapStopLen => "cap+stop+len",
            Group::Location => "location",
            Group::MinMax => "minmax",
            Group::SentDoc => "sent+doc",
        }
    }

    pub fn valid_names() -> String {
        Group::ALL.map(Group::name).join(", ")
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Group {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Group::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| Error::UnknownGroup {
                name: s.to_string(),
                valid: Group::valid_names(),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Weighting {
    RawCount,
    Tfidf,
}

impl Weighting {
    pub fn name(self) -> &'static str {
        match self {
            Weighting::RawCount => "raw-count",
            Weighting::Tfidf => "tfidf",
        }
    }
}

/// Coverage level: a word "covers well" when some sentence contains it at
/// least `min_count` times, and "matters" when at least `min_fraction` of
/// sentences contain it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageLevel {
    pub min_count: u32,
    pub min_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// cap+stop+len: minimum share of capitalized occurrences.
    pub capitalized_fraction: f64,
    /// cap+stop+len: minimum word lengths in characters.
    pub length_cutoffs: Vec<usize>,
    /// minmax: sizes of the most-frequent-word lists.
    pub minmax_top_k: Vec<usize>,
    /// location: lower edges of position bins, starting at 0.
    pub position_bins: Vec<usize>,
    /// sent+doc: minimum fraction of sentences containing the word.
    pub sentence_fractions: Vec<f64>,
    /// sent+doc: minimum fraction of documents containing the word.
    pub document_fractions: Vec<f64>,
    /// Number of equal-width bins over cosine similarity in `[0, 1]`.
    pub similarity_bins: usize,
    /// Lower edges of the sentence-fraction importance buckets, starting at 0.
    pub importance_bins: Vec<f64>,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            capitalized_fraction: 0.5,
            length_cutoffs: vec![5, 8],
            minmax_top_k: vec![10, 30, 100],
            position_bins: vec![0, 1, 2, 3, 6],
            sentence_fractions: vec![0.02, 0.05, 0.1],
            document_fractions: vec![0.5, 1.0],
            similarity_bins: 10,
            importance_bins: vec![0.0, 0.02, 0.05, 0.1, 0.2],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub enabled_groups: BTreeSet<Group>,
    pub thresholds: Thresholds,
    pub weighting: BTreeMap<Group, Vec<Weighting>>,
    pub coverage_levels: Vec<CoverageLevel>,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        let mut weighting = BTreeMap::new();
        for g in Group::ALL {
            weighting.insert(g, vec![Weighting::Tfidf]);
        }
        weighting.insert(Group::Basic, vec![Weighting::RawCount, Weighting::Tfidf]);
        FeatureConfig {
            enabled_groups: Group::ALL.into_iter().collect(),
            thresholds: Thresholds::default(),
            weighting,
            coverage_levels: vec![
                CoverageLevel { min_count: 1, min_fraction: 0.02 },
                CoverageLevel { min_count: 1, min_fraction: 0.1 },
                CoverageLevel { min_count: 2, min_fraction: 0.02 },
                CoverageLevel { min_count: 2, min_fraction: 0.1 },
            ],
        }
    }
}

impl FeatureConfig {
    pub fn only(groups: &[Group]) -> Self {
        FeatureConfig {
            enabled_groups: groups.iter().copied().collect(),
            ..Default::default()
        }
    }

    pub fn without(&self, group: Group) -> Self {
        let mut cfg = self.clone();
        cfg.enabled_groups.remove(&group);
        cfg
    }

    // negated comparisons so that NaN fails too
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidFeatureConfig(m.to_string()));
        let t = &self.thresholds;
        if self.enabled_groups.is_empty() {
            return bad("at least one feature group must be enabled");
        }
        if !(t.capitalized_fraction > 0.0) {
            return bad("capitalized_fraction must be positive");
        }
        if t.length_cutoffs.contains(&0) || t.minmax_top_k.contains(&0) {
            return bad("length cutoffs and top-k sizes must be positive");
        }
        let fractions = t.sentence_fractions.iter().chain(&t.document_fractions);
        if fractions.clone().any(|&f| !(f > 0.0)) {
            return bad("frequency thresholds must be positive");
        }
        if t.similarity_bins == 0 {
            return bad("similarity_bins must be positive");
        }
        if t.position_bins.first() != Some(&0) || t.position_bins.windows(2).any(|w| w[0] >= w[1]) {
            return bad("position bins must start at 0 and strictly increase");
        }
        if t.importance_bins.first() != Some(&0.0)
            || t.importance_bins.windows(2).any(|w| !(w[0] < w[1]))
        {
            return bad("importance bins must start at 0 and strictly increase");
        }
        if self
            .coverage_levels
            .iter()
            .any(|l| l.min_count == 0 || !(l.min_fraction > 0.0))
        {
            return bad("coverage level thresholds must be positive");
        }
        for g in &self.enabled_groups {
            if *g != Group::Location && self.weightings(*g).is_empty() {
                return Err(Error::InvalidFeatureConfig(format!(
                    "group {g} has no weighting scheme"
                )));
            }
        }
        Ok(())
    }

    pub fn weightings(&self, group: Group) -> &[Weighting] {
        self.weighting.get(&group).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Variants of `group` in registry order.
    pub fn variants(&self, group: Group) -> Vec<Variant> {
        let t = &self.thresholds;
        match group {
            Group::Basic => vec![Variant::All],
            Group::CapStopLen => [Variant::Capitalized, Variant::NonStop]
                .into_iter()
                .chain(t.length_cutoffs.iter().map(|&c| Variant::MinLength(c)))
                .collect(),
            Group::Location => (0..t.position_bins.len()).map(Variant::Position).collect(),
            Group::MinMax => t.minmax_top_k.iter().map(|&k| Variant::TopK(k)).collect(),
            Group::SentDoc => t
                .sentence_fractions
                .iter()
                .map(|&f| Variant::SentenceFraction(f))
                .chain(t.document_fractions.iter().map(|&f| Variant::DocumentFraction(f)))
                .collect(),
        }
    }

    pub fn position_bin(&self, position: usize) -> usize {
        let bins = &self.thresholds.position_bins;
        bins.iter().rposition(|&lo| position >= lo).unwrap_or(0)
    }
}

/// A threshold refinement of a word group.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Variant {
    All,
    Capitalized,
    NonStop,
    MinLength(usize),
    /// Index into the position bins.
    Position(usize),
    TopK(usize),
    SentenceFraction(f64),
    DocumentFraction(f64),
}

impl Variant {
    fn label(&self, cfg: &FeatureConfig) -> String {
        match *self {
            Variant::All => "all".into(),
            Variant::Capitalized => "cap".into(),
            Variant::NonStop => "nonstop".into(),
            Variant::MinLength(c) => format!("len>={c}"),
            Variant::Position(b) => {
                let bins = &cfg.thresholds.position_bins;
                match bins.get(b + 1) {
                    Some(hi) => format!("pos[{},{})", bins[b], hi),
                    None => format!("pos[{},inf)", bins[b]),
                }
            }
            Variant::TopK(k) => format!("top{k}"),
            Variant::SentenceFraction(f) => format!("sf>={f}"),
            Variant::DocumentFraction(f) => format!("df>={f}"),
        }
    }
}

/// Word-level statistics derived once per document set.
#[derive(Debug, Clone)]
pub struct WordContext {
    pub sent_frac: Vec<f64>,
    pub doc_frac: Vec<f64>,
    pub cap_frac: Vec<f64>,
    /// 0-based rank by descending corpus frequency, ties by word.
    pub freq_rank: Vec<usize>,
    pub first_bin: Vec<usize>,
    pub idf: Vec<f64>,
}

impl WordContext {
    pub fn new(x: &DocumentSet, cfg: &FeatureConfig) -> Self {
        let v = &x.vocabulary;
        let n = x.len() as f64;
        let mut order: Vec<usize> = (0..v.len()).collect();
        order.sort_by(|&a, &b| {
            v.stats(b)
                .count
                .cmp(&v.stats(a).count)
                .then_with(|| v.word(a).cmp(v.word(b)))
        });
        let mut freq_rank = vec![0; v.len()];
        for (rank, &w) in order.iter().enumerate() {
            freq_rank[w] = rank;
        }
        WordContext {
            sent_frac: v.iter().map(|(_, _, s)| s.sent_freq as f64 / n).collect(),
            doc_frac: v
                .iter()
                .map(|(_, _, s)| s.doc_freq as f64 / x.num_docs.max(1) as f64)
                .collect(),
            cap_frac: v
                .iter()
                .map(|(_, _, s)| s.capitalized_count as f64 / s.count as f64)
                .collect(),
            freq_rank,
            first_bin: v
                .iter()
                .map(|(_, _, s)| cfg.position_bin(s.first_position))
                .collect(),
            idf: (0..v.len()).map(|w| x.idf(w)).collect(),
        }
    }
}

/// One variant of one word group.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WordGroup {
    pub group: Group,
    pub variant: Variant,
}

impl WordGroup {
    /// Membership depends only on statistics of the document set.
    pub fn contains(&self, x: &DocumentSet, ctx: &WordContext, cfg: &FeatureConfig, word: usize) -> bool {
        let stats = x.vocabulary.stats(word);
        match self.variant {
            Variant::All => true,
            Variant::Capitalized => ctx.cap_frac[word] >= cfg.thresholds.capitalized_fraction,
            Variant::NonStop => !stats.is_stopword,
            Variant::MinLength(c) => stats.length >= c,
            Variant::Position(b) => ctx.first_bin[word] == b,
            Variant::TopK(k) => ctx.freq_rank[word] < k,
            Variant::SentenceFraction(f) => ctx.sent_frac[word] >= f,
            Variant::DocumentFraction(f) => ctx.doc_frac[word] >= f,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureSpace {
    Pairwise,
    Coverage,
}

/// Deterministic feature index layout for one space.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRegistry {
    space: FeatureSpace,
    names: Vec<String>,
}

impl FeatureRegistry {
    pub fn new(cfg: &FeatureConfig, space: FeatureSpace) -> Self {
        let mut names = Vec::new();
        let bins = cfg.thresholds.similarity_bins;
        for &group in &cfg.enabled_groups {
            for variant in cfg.variants(group) {
                let prefix = format!("{}/{}", group, variant.label(cfg));
                match space {
                    FeatureSpace::Pairwise if group == Group::Location => {
                        names.push(format!("{prefix}/presence"));
                        names.push(format!("{prefix}/cos"));
                    }
                    FeatureSpace::Pairwise => {
                        for w in cfg.weightings(group) {
                            names.push(format!("{prefix}/{}/cos", w.name()));
                            for b in 0..bins {
                                names.push(format!("{prefix}/{}/bin{b}", w.name()));
                            }
                        }
                    }
                    FeatureSpace::Coverage => {
                        names.push(format!("{prefix}/member"));
                        for w in cfg.weightings(group) {
                            names.push(format!("{prefix}/{}", w.name()));
                        }
                        let edges = &cfg.thresholds.importance_bins;
                        for (b, lo) in edges.iter().enumerate() {
                            match edges.get(b + 1) {
                                Some(hi) => names.push(format!("{prefix}/imp[{lo},{hi})")),
                                None => names.push(format!("{prefix}/imp[{lo},inf)")),
                            }
                        }
                        for l in &cfg.coverage_levels {
                            names.push(format!(
                                "{prefix}/cover(a={},b={})",
                                l.min_count, l.min_fraction
                            ));
                        }
                    }
                }
            }
        }
        FeatureRegistry { space, names }
    }

    pub fn space(&self) -> FeatureSpace {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, index: usize) -> &str {
        &self.names[index]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// Unit-normalized sparse vector of one sentence.
type UnitVector = Vec<(usize, f64)>;

/// Per-sentence unit vectors for each (variant, weighting) block.
struct PairFeaturizer {
    dim: usize,
    bins: usize,
    /// (offset of the cosine feature, unit vectors per sentence)
    blocks: Vec<(usize, Vec<UnitVector>)>,
    /// (offset, bin index per sentence, unit basic-tfidf vectors)
    location: Option<LocationBlock>,
}

struct LocationBlock {
    offset: usize,
    bin_of: Vec<usize>,
    basis: Vec<Vec<(usize, f64)>>,
}

fn unit(v: Vec<(usize, f64)>) -> Vec<(usize, f64)> {
    let norm = v.iter().map(|(_, x)| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Vec::new();
    }
    v.into_iter().map(|(i, x)| (i, x / norm)).collect()
}

fn weighted_vectors(
    x: &DocumentSet,
    ctx: &WordContext,
    members: &[bool],
    weighting: Weighting,
) -> Vec<Vec<(usize, f64)>> {
    x.sentences
        .iter()
        .map(|s| {
            unit(
                s.terms
                    .iter()
                    .filter(|&&(w, _)| members[w])
                    .map(|&(w, c)| {
                        let tf = c as f64;
                        match weighting {
                            Weighting::RawCount => (w, tf),
                            Weighting::Tfidf => (w, tf * ctx.idf[w]),
                        }
                    })
                    .collect(),
            )
        })
        .collect()
}

impl PairFeaturizer {
    fn new(x: &DocumentSet, cfg: &FeatureConfig) -> Self {
        let ctx = WordContext::new(x, cfg);
        let bins = cfg.thresholds.similarity_bins;
        let mut offset = 0;
        let mut blocks = Vec::new();
        let mut location = None;
        for &group in &cfg.enabled_groups {
            if group == Group::Location {
                let all = vec![true; x.vocabulary.len()];
                location = Some(LocationBlock {
                    offset,
                    bin_of: x
                        .sentences
                        .iter()
                        .map(|s| cfg.position_bin(s.position_in_doc))
                        .collect(),
                    basis: weighted_vectors(x, &ctx, &all, Weighting::Tfidf),
                });
                offset += 2 * cfg.thresholds.position_bins.len();
                continue;
            }
            for variant in cfg.variants(group) {
                let wg = WordGroup { group, variant };
                let members: Vec<bool> = (0..x.vocabulary.len())
                    .map(|w| wg.contains(x, &ctx, cfg, w))
                    .collect();
                for &weighting in cfg.weightings(group) {
                    blocks.push((offset, weighted_vectors(x, &ctx, &members, weighting)));
                    offset += 1 + bins;
                }
            }
        }
        PairFeaturizer {
            dim: offset,
            bins,
            blocks,
            location,
        }
    }

    fn features(&self, i: usize, j: usize) -> FeatureVector {
        let mut entries = Vec::new();
        for (offset, vectors) in &self.blocks {
            let cos = sparse_dot(&vectors[i], &vectors[j]).min(1.0);
            if cos > 0.0 {
                // tolerance keeps exact edges like 0.5 from rounding into the bin below
                let bin = ((cos * self.bins as f64 + 1e-9) as usize).min(self.bins - 1);
                entries.push((*offset, cos));
                entries.push((offset + 1 + bin, 1.0));
            }
        }
        if let Some(loc) = &self.location {
            let cos = sparse_dot(&loc.basis[i], &loc.basis[j]).min(1.0);
            for b in [loc.bin_of[i], loc.bin_of[j]] {
                entries.push((loc.offset + 2 * b, 0.5));
                if cos > 0.0 {
                    entries.push((loc.offset + 2 * b + 1, 0.5 * cos));
                }
            }
        }
        FeatureVector::from_entries(self.dim, entries)
    }
}

/// `φ^p_x(i, j)`: symmetric pair features of two distinct sentences.
pub fn pairwise_features(x: &DocumentSet, i: usize, j: usize, cfg: &FeatureConfig) -> Result<FeatureVector> {
    x.check_id(i)?;
    x.check_id(j)?;
    if i == j {
        return Err(Error::SamePair(i));
    }
    Ok(PairFeaturizer::new(x, cfg).features(i.min(j), i.max(j)))
}

/// `φ^c_x(v)` for one word.
pub fn coverage_features(x: &DocumentSet, word: &str, cfg: &FeatureConfig) -> Result<FeatureVector> {
    let id = x
        .vocabulary
        .id(word)
        .ok_or_else(|| Error::UnknownWord(word.to_string()))?;
    let ctx = WordContext::new(x, cfg);
    Ok(word_features(x, &ctx, cfg, id))
}

fn word_features(x: &DocumentSet, ctx: &WordContext, cfg: &FeatureConfig, word: usize) -> FeatureVector {
    let t = &cfg.thresholds;
    let stats = x.vocabulary.stats(word);
    let sf = ctx.sent_frac[word];
    let importance = t.importance_bins.iter().rposition(|&lo| sf >= lo).unwrap_or(0);
    let mut entries = Vec::new();
    let mut offset = 0;
    for &group in &cfg.enabled_groups {
        let weightings = cfg.weightings(group);
        let block = 1 + weightings.len() + t.importance_bins.len() + cfg.coverage_levels.len();
        for variant in cfg.variants(group) {
            if (WordGroup { group, variant }).contains(x, ctx, cfg, word) {
                entries.push((offset, 1.0));
                for (k, w) in weightings.iter().enumerate() {
                    let value = match w {
                        Weighting::RawCount => sf,
                        Weighting::Tfidf => sf * ctx.idf[word],
                    };
                    entries.push((offset + 1 + k, value));
                }
                entries.push((offset + 1 + weightings.len() + importance, 1.0));
                let levels = offset + 1 + weightings.len() + t.importance_bins.len();
                for (k, level) in cfg.coverage_levels.iter().enumerate() {
                    if stats.max_sentence_count >= level.min_count && sf >= level.min_fraction {
                        entries.push((levels + k, 1.0));
                    }
                }
            }
            offset += block;
        }
    }
    FeatureVector::from_entries(offset, entries)
}

/// How the redundancy term enters the pairwise joint feature map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum TradeOff {
    /// `Σ_cross φ − λ Σ_redundancy φ`.
    Fixed { lambda: f64 },
    /// `[Σ_cross φ ; −Σ_redundancy φ]` in two disjoint blocks.
    Split,
}

/// All pair features of one document set, computed once.
#[derive(Debug, Clone)]
pub struct PairwiseTable {
    n: usize,
    dim: usize,
    pairs: Vec<FeatureVector>,
}

impl PairwiseTable {
    pub fn build(x: &DocumentSet, cfg: &FeatureConfig) -> Self {
        let f = PairFeaturizer::new(x, cfg);
        let n = x.len();
        let mut pairs = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                pairs.push(f.features(i, j));
            }
        }
        PairwiseTable { n, dim: f.dim, pairs }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> &FeatureVector {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        assert!(a != b && b < self.n);
        // row a starts after a rows of decreasing length
        let base = a * (2 * self.n - a - 1) / 2;
        &self.pairs[base + (b - a - 1)]
    }

    /// `σ(i, j) = w · φ(i, j)`.
    pub fn sigma(&self, w: &[f64]) -> SimMatrix {
        SimMatrix::from_fn(self.n, |i, j| self.get(i, j).dot(w))
    }

    pub fn psi_dim(&self, trade_off: TradeOff) -> usize {
        match trade_off {
            TradeOff::Fixed { .. } => self.dim,
            TradeOff::Split => 2 * self.dim,
        }
    }

    pub fn psi(&self, y: &Summary, trade_off: TradeOff) -> FeatureVector {
        let inside = y.mask(self.n);
        let mut acc = vec![0.0; self.psi_dim(trade_off)];
        let (red_offset, red_scale) = match trade_off {
            TradeOff::Fixed { lambda } => (0, -lambda),
            TradeOff::Split => (self.dim, -1.0),
        };
        for &j in y.ids() {
            for (i, &is_in) in inside.iter().enumerate() {
                if i == j {
                    continue;
                }
                let phi = self.get(i, j);
                if !is_in {
                    phi.add_to(&mut acc, 1.0);
                } else {
                    phi.add_to(&mut acc[red_offset..], red_scale);
                }
            }
        }
        FeatureVector::from_dense(&acc)
    }
}

/// All word features of one document set, indexed by vocabulary id.
#[derive(Debug, Clone)]
pub struct CoverageTable {
    dim: usize,
    words: Vec<FeatureVector>,
    sentence_words: Vec<Vec<usize>>,
}

impl CoverageTable {
    pub fn build(x: &DocumentSet, cfg: &FeatureConfig) -> Self {
        let ctx = WordContext::new(x, cfg);
        let words: Vec<FeatureVector> = (0..x.vocabulary.len())
            .map(|w| word_features(x, &ctx, cfg, w))
            .collect();
        CoverageTable {
            dim: FeatureRegistry::new(cfg, FeatureSpace::Coverage).dim(),
            words,
            sentence_words: x
                .sentences
                .iter()
                .map(|s| s.terms.iter().map(|&(w, _)| w).collect())
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn word(&self, id: usize) -> &FeatureVector {
        &self.words[id]
    }

    /// `ω(v) = w · φ^c(v)` for every vocabulary word.
    pub fn omega(&self, w: &[f64]) -> Vec<f64> {
        self.words.iter().map(|f| f.dot(w)).collect()
    }

    pub fn psi(&self, y: &Summary) -> FeatureVector {
        let mut covered = vec![false; self.words.len()];
        let mut acc = vec![0.0; self.dim];
        for &k in y.ids() {
            for &v in &self.sentence_words[k] {
                if !covered[v] {
                    covered[v] = true;
                    self.words[v].add_to(&mut acc, 1.0);
                }
            }
        }
        FeatureVector::from_dense(&acc)
    }
}

/// `Ψ^p(x, y)`.
pub fn joint_feature_map_pairwise(
    x: &DocumentSet,
    y: &Summary,
    cfg: &FeatureConfig,
    trade_off: TradeOff,
) -> Result<FeatureVector> {
    y.ids().iter().try_for_each(|&i| x.check_id(i))?;
    Ok(PairwiseTable::build(x, cfg).psi(y, trade_off))
}

/// `Ψ^c(x, y)`.
pub fn joint_feature_map_coverage(x: &DocumentSet, y: &Summary, cfg: &FeatureConfig) -> Result<FeatureVector> {
    y.ids().iter().try_for_each(|&i| x.check_id(i))?;
    Ok(CoverageTable::build(x, cfg).psi(y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Stopwords;
    use crate::greedy::MarginalGain;
    use crate::scoring::{CoverageScorer, PairwiseScorer};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn set(docs: &[&str]) -> DocumentSet {
        DocumentSet::from_documents("t", docs, &Stopwords::default()).unwrap()
    }

    fn summary(x: &DocumentSet, ids: &[usize]) -> Summary {
        x.summary(ids).unwrap()
    }

    fn basic_raw() -> FeatureConfig {
        let mut cfg = FeatureConfig::only(&[Group::Basic]);
        cfg.weighting.insert(Group::Basic, vec![Weighting::RawCount]);
        cfg
    }

    #[test]
    fn registry_is_deterministic_and_sized() {
        let cfg = FeatureConfig::default();
        let a = FeatureRegistry::new(&cfg, FeatureSpace::Pairwise);
        let b = FeatureRegistry::new(&cfg, FeatureSpace::Pairwise);
        assert_eq!(a, b);
        // basic: 2 weightings x 11, cap+stop+len: 4 x 11, location: 5 x 2,
        // minmax: 3 x 11, sent+doc: 5 x 11
        assert_eq!(a.dim(), 22 + 44 + 10 + 33 + 55);
        assert_eq!(a.name(0), "basic/all/raw-count/cos");
        let c = FeatureRegistry::new(&cfg, FeatureSpace::Coverage);
        // per variant: member + weightings + 5 importance + 4 levels
        assert_eq!(c.dim(), 12 + 4 * 11 + 5 * 11 + 3 * 11 + 5 * 11);
    }

    #[test]
    fn identical_sentences_have_unit_cosine() {
        let x = set(&["Red apple pie. Red apple pie."]);
        let f = pairwise_features(&x, 0, 1, &basic_raw()).unwrap();
        assert!((f.get(0) - 1.0).abs() < 1e-12);
        assert_eq!(f.get(1 + 9), 1.0);
    }

    #[test]
    fn disjoint_sentences_have_no_features() {
        let x = set(&["Red apple. Blue sky."]);
        let f = pairwise_features(&x, 0, 1, &FeatureConfig::only(&[Group::Basic, Group::SentDoc])).unwrap();
        assert!(f.is_zero());
    }

    #[test]
    fn half_overlap_cosine() {
        let x = set(&["Apple banana. Apple cherry."]);
        let f = pairwise_features(&x, 0, 1, &basic_raw()).unwrap();
        assert!((f.get(0) - 0.5).abs() < 1e-15);
        assert_eq!(f.get(1 + 5), 1.0);
        assert_eq!(f.nnz(), 2);
    }

    #[test]
    fn pairwise_errors() {
        let x = set(&["Apple banana. Apple cherry."]);
        assert!(matches!(pairwise_features(&x, 0, 0, &basic_raw()), Err(Error::SamePair(0))));
        assert!(matches!(
            pairwise_features(&x, 0, 5, &basic_raw()),
            Err(Error::InvalidSentence { id: 5, .. })
        ));
    }

    #[test]
    fn location_pair_features() {
        let x = set(&["Apple banana. Apple cherry. Kiwi fig.", "Apple plum."]);
        let cfg = FeatureConfig::only(&[Group::Location]);
        let reg = FeatureRegistry::new(&cfg, FeatureSpace::Pairwise);
        let f = pairwise_features(&x, 0, 3, &cfg).unwrap();
        // both sentences lead their document
        assert_eq!(f.get(reg.index_of("location/pos[0,1)/presence").unwrap()), 1.0);
        let g = pairwise_features(&x, 0, 2, &cfg).unwrap();
        assert_eq!(g.get(reg.index_of("location/pos[0,1)/presence").unwrap()), 0.5);
        assert_eq!(g.get(reg.index_of("location/pos[2,3)/presence").unwrap()), 0.5);
        assert_eq!(g.get(reg.index_of("location/pos[2,3)/cos").unwrap()), 0.0);
    }

    #[test]
    fn coverage_importance_indicator() {
        // "apple" occurs in 2 of 4 sentences
        let x = set(&["Apple pie. Apple tart. Kiwi fig. Plum jam."]);
        let mut cfg = FeatureConfig::only(&[Group::Basic]);
        cfg.coverage_levels = vec![CoverageLevel { min_count: 1, min_fraction: 0.1 }];
        let reg = FeatureRegistry::new(&cfg, FeatureSpace::Coverage);
        let f = coverage_features(&x, "apple", &cfg).unwrap();
        assert_eq!(f.get(reg.index_of("basic/all/cover(a=1,b=0.1)").unwrap()), 1.0);
        assert_eq!(f.get(reg.index_of("basic/all/member").unwrap()), 1.0);
        assert_eq!(f.get(reg.index_of("basic/all/imp[0.2,inf)").unwrap()), 1.0);
        assert!(matches!(coverage_features(&x, "zebra", &cfg), Err(Error::UnknownWord(_))));
    }

    #[test]
    fn disabled_group_emits_nothing() {
        let x = set(&["Apple pie. Apple tart."]);
        let cfg = FeatureConfig::default().without(Group::Location);
        let reg = FeatureRegistry::new(&cfg, FeatureSpace::Coverage);
        assert!(reg.names().iter().all(|n| !n.starts_with("location/")));
        let f = coverage_features(&x, "apple", &cfg).unwrap();
        assert!(f.entries().iter().all(|&(i, _)| !reg.name(i).starts_with("location/")));
    }

    #[test]
    fn minmax_ignores_rare_words() {
        // 12 words appear at least twice, "once" only once; top-10 table
        let frequent = "alpha bravo charlie delta echo foxtrot golf hotel india juliet kilo lima";
        let doc = format!("{frequent}. {frequent} once.");
        let x = set(&[doc.as_str()]);
        let mut cfg = FeatureConfig::only(&[Group::MinMax]);
        cfg.thresholds.minmax_top_k = vec![10];
        let ctx = WordContext::new(&x, &cfg);
        let once = x.vocabulary.id("once").unwrap();
        assert_eq!(ctx.freq_rank[once], 12);
        assert!(coverage_features(&x, "once", &cfg).unwrap().is_zero());
        assert!(!coverage_features(&x, "alpha", &cfg).unwrap().is_zero());
    }

    #[test]
    fn validation_rejects_bad_configs() {
        assert!(FeatureConfig::default().validate().is_ok());
        let mut cfg = FeatureConfig::default();
        cfg.enabled_groups.clear();
        assert!(cfg.validate().is_err());
        let mut cfg = FeatureConfig::default();
        cfg.thresholds.position_bins = vec![1, 3];
        assert!(cfg.validate().is_err());
        let mut cfg = FeatureConfig::default();
        cfg.thresholds.sentence_fractions = vec![0.0];
        assert!(cfg.validate().is_err());
        assert!("bogus".parse::<Group>().unwrap_err().to_string().contains("sent+doc"));
    }

    #[test]
    fn joint_map_edge_cases() {
        let x = set(&["Apple banana. Apple cherry. Banana cherry."]);
        let cfg = FeatureConfig::default();
        let fixed = TradeOff::Fixed { lambda: 2.0 };
        assert!(joint_feature_map_pairwise(&x, &Summary::default(), &cfg, fixed).unwrap().is_zero());
        assert!(joint_feature_map_coverage(&x, &Summary::default(), &cfg).unwrap().is_zero());

        let table = PairwiseTable::build(&x, &cfg);
        let all = summary(&x, &[0, 1, 2]);
        let mut red = vec![0.0; table.dim()];
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    table.get(i, j).add_to(&mut red, -2.0);
                }
            }
        }
        let psi = table.psi(&all, fixed).to_dense();
        for (a, b) in psi.iter().zip(&red) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn joint_map_cross_sum_example() {
        // φ(0,1) = 0.5, φ(0,2) = 0.2 on one feature, y = {0} → 0.7
        let x = set(&["Aa. Bb. Cc."]);
        let vals = [[0.0, 0.5, 0.2], [0.5, 0.0, 0.1], [0.2, 0.1, 0.0]];
        let table = PairwiseTable {
            n: 3,
            dim: 1,
            pairs: vec![
                FeatureVector::from_dense(&[vals[0][1]]),
                FeatureVector::from_dense(&[vals[0][2]]),
                FeatureVector::from_dense(&[vals[1][2]]),
            ],
        };
        let psi = table.psi(&summary(&x, &[0]), TradeOff::Fixed { lambda: 4.0 });
        assert!((psi.get(0) - 0.7).abs() < 1e-15);
        let split = table.psi(&summary(&x, &[0, 1]), TradeOff::Split);
        assert!((split.get(0) - 0.3).abs() < 1e-15);
        assert!((split.get(1) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn coverage_map_uses_word_sets() {
        let x = set(&["Apple. Apple."]);
        let cfg = FeatureConfig::default();
        let both = joint_feature_map_coverage(&x, &summary(&x, &[0, 1]), &cfg).unwrap();
        assert_eq!(both, coverage_features(&x, "apple", &cfg).unwrap());
    }

    #[test]
    fn coverage_map_is_sum_over_covered_words() {
        let x = set(&["Apple banana. Banana cherry. Cherry date apple."]);
        let cfg = FeatureConfig::default();
        let y = summary(&x, &[0, 1]);
        let psi = joint_feature_map_coverage(&x, &y, &cfg).unwrap();
        let mut expected = vec![0.0; psi.dim()];
        for w in ["apple", "banana", "cherry"] {
            coverage_features(&x, w, &cfg).unwrap().add_to(&mut expected, 1.0);
        }
        assert_eq!(psi, FeatureVector::from_dense(&expected));
    }

    fn random_set(rng: &mut ChaCha8Rng) -> DocumentSet {
        let words = ["Apple", "banana", "cherry", "date", "Elder", "fig", "grape", "the", "of", "kiwi"];
        let docs: Vec<String> = (0..rng.gen_range(1..4))
            .map(|_| {
                (0..rng.gen_range(1..5))
                    .map(|_| {
                        let mut s: Vec<&str> = (0..rng.gen_range(1..7))
                            .map(|_| words[rng.gen_range(0..words.len())])
                            .collect();
                        s.insert(0, "Zz");
                        format!("{}.", s.join(" "))
                    })
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect();
        DocumentSet::from_documents("r", &docs, &Stopwords::default()).unwrap()
    }

    #[test]
    fn linearity_anchor() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cfg = FeatureConfig::default();
        for _ in 0..30 {
            let x = random_set(&mut rng);
            let n = x.len();
            let y_ids: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.4)).collect();
            let y = summary(&x, &y_ids);

            let pt = PairwiseTable::build(&x, &cfg);
            let w: Vec<f64> = (0..pt.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let lambda = rng.gen_range(0.5..5.0);
            let via_psi = pt.psi(&y, TradeOff::Fixed { lambda }).dot(&w);
            let via_sigma = PairwiseScorer::new(pt.sigma(&w), lambda, false).score(&y);
            assert!((via_psi - via_sigma).abs() < 1e-9, "{via_psi} vs {via_sigma}");

            let w2: Vec<f64> = (0..2 * pt.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let via_psi = pt.psi(&y, TradeOff::Split).dot(&w2);
            let via_sigma = PairwiseScorer::new(pt.sigma(&w2[..pt.dim()]), 1.0, false)
                .with_redundancy(pt.sigma(&w2[pt.dim()..]))
                .score(&y);
            assert!((via_psi - via_sigma).abs() < 1e-9);

            let ct = CoverageTable::build(&x, &cfg);
            let w: Vec<f64> = (0..ct.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let via_psi = ct.psi(&y).dot(&w);
            let via_omega = CoverageScorer::new(&x, ct.omega(&w), false).score(&y);
            assert!((via_psi - via_omega).abs() < 1e-9);
        }
    }

    #[test]
    fn coverage_increment_is_newly_covered_words() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let cfg = FeatureConfig::default();
        for _ in 0..30 {
            let x = random_set(&mut rng);
            let ct = CoverageTable::build(&x, &cfg);
            let k = rng.gen_range(0..x.len());
            let y_ids: Vec<usize> = (0..x.len()).filter(|&i| i != k && rng.gen_bool(0.4)).collect();
            let y = summary(&x, &y_ids);
            let mut yk = y.clone();
            yk.push(k, x.sentences[k].cost);
            let diff = ct.psi(&yk).sub(&ct.psi(&y));
            let covered: BTreeSet<usize> = y_ids
                .iter()
                .flat_map(|&i| x.sentences[i].terms.iter().map(|&(w, _)| w))
                .collect();
            let mut expected = vec![0.0; ct.dim()];
            for &(w, _) in &x.sentences[k].terms {
                if !covered.contains(&w) {
                    ct.word(w).add_to(&mut expected, 1.0);
                }
            }
            for (a, b) in diff.to_dense().iter().zip(&expected) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pairwise_features_symmetric_and_sparse() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let cfg = FeatureConfig::default();
        for _ in 0..20 {
            let x = random_set(&mut rng);
            if x.len() < 2 {
                continue;
            }
            let f = PairFeaturizer::new(&x, &cfg);
            for i in 0..x.len() {
                for j in 0..x.len() {
                    if i == j {
                        continue;
                    }
                    let a = pairwise_features(&x, i, j, &cfg).unwrap();
                    assert_eq!(a, pairwise_features(&x, j, i, &cfg).unwrap());
                    assert!(a.entries().iter().all(|&(_, v)| v != 0.0 && v.is_finite()));
                    // the raw featurizer is symmetric too, not just the public wrapper
                    assert_eq!(f.features(i, j), f.features(j, i));
                }
            }
        }
    }

    #[test]
    fn sigma_state_matches_table() {
        let x = set(&["Apple banana. Apple cherry. Banana cherry kiwi."]);
        let cfg = FeatureConfig::default();
        let t = PairwiseTable::build(&x, &cfg);
        let w = vec![0.1; t.dim()];
        let s = PairwiseScorer::new(t.sigma(&w), 1.0, false);
        let mut st = s.state();
        st.commit(0);
        let expected = s.score(&summary(&x, &[0, 2])) - s.score(&summary(&x, &[0]));
        assert!((st.gain(2) - expected).abs() < 1e-12);
    }
}
