//! Resampled train/validation/test protocol and the reports built on it.
//!
//! Every report runs the same recipe per resample: train one model per C on
//! the training ids, keep the C with the best validation ROUGE-1 F, and score
//! that model on the test ids. Scores are then either averaged per resample
//! and across resamples, or pooled into one list of test sets.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{DatasetRecord, DocumentSet, ReferenceSet, Stopwords};
use crate::error::{Error, Result};
use crate::features::Group;
use crate::greedy::{greedy_maximize, GreedyConfig};
use crate::learner::{predict, train, Model, ModelKind, ModelSpec, TrainerConfig};
use crate::rouge::{evaluate_summary, make_target, rouge1_prf, LossConfig, Prf, UnigramCounts};
use crate::scoring::{PairwiseScorer, Summary};
use crate::stats::{mean, stderr};

/// C values tried on validation data by default.
pub const DEFAULT_C_GRID: [f64; 6] = [0.01, 0.1, 1.0, 10.0, 100.0, 1000.0];

/// Training-set sizes of the learning curve.
pub const DEFAULT_CURVE_SIZES: [usize; 6] = [1, 2, 5, 10, 20, 40];

/// A document set with its references and target summary.
pub type Example = (DocumentSet, ReferenceSet);

/// Builds every record and its target summary.
///
/// `loss` decides which references the targets are built from; a budget on a
/// record overrides `greedy.budget_bytes`.
pub fn prepare(
    records: &[DatasetRecord],
    stopwords: &Stopwords,
    greedy: &GreedyConfig,
    loss: &LossConfig,
) -> Result<Vec<Example>> {
    records
        .par_iter()
        .map(|r| {
            let (x, mut y) = r.build(stopwords)?;
            make_target(&x, &mut y, greedy, loss)?;
            Ok((x, y))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSizes {
    pub train: usize,
    pub val: usize,
    pub test: usize,
}

impl Default for SplitSizes {
    fn default() -> Self {
        SplitSizes {
            train: 20,
            val: 5,
            test: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub dataset: PathBuf,
    pub splits: Vec<Split>,
    pub resamples: usize,
    pub budget_bytes: u64,
    pub model_kind: ModelKind,
    #[serde(rename = "C_grid")]
    pub c_grid: Vec<f64>,
    pub r: f64,
    pub seed: u64,
}

impl ExperimentPlan {
    /// Draws `resamples` disjoint splits of `num_sets` ids from a seeded shuffle.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        dataset: impl Into<PathBuf>,
        num_sets: usize,
        sizes: SplitSizes,
        resamples: usize,
        model_kind: ModelKind,
        c_grid: Vec<f64>,
        greedy: &GreedyConfig,
        seed: u64,
    ) -> Result<Self> {
        let needed = sizes.train + sizes.val + sizes.test;
        if sizes.train == 0 || sizes.test == 0 || sizes.val == 0 {
            return Err(Error::InvalidPlan("train, validation and test sizes must be positive".into()));
        }
        if needed > num_sets {
            return Err(Error::InvalidPlan(format!(
                "split {}/{}/{} needs {needed} sets, dataset has {num_sets}",
                sizes.train, sizes.val, sizes.test
            )));
        }
        if resamples == 0 {
            return Err(Error::InvalidPlan("need at least one resample".into()));
        }
        if c_grid.is_empty() || c_grid.iter().any(|&c| !(c > 0.0 && c.is_finite())) {
            return Err(Error::InvalidPlan("C grid must hold positive finite values".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let splits = (0..resamples)
            .map(|_| {
                let mut ids: Vec<usize> = (0..num_sets).collect();
                ids.shuffle(&mut rng);
                Split {
                    train: ids[..sizes.train].to_vec(),
                    val: ids[sizes.train..sizes.train + sizes.val].to_vec(),
                    test: ids[sizes.train + sizes.val..needed].to_vec(),
                }
            })
            .collect();
        Ok(ExperimentPlan {
            dataset: dataset.into(),
            splits,
            resamples,
            budget_bytes: greedy.budget_bytes,
            model_kind,
            c_grid,
            r: greedy.r,
            seed,
        })
    }
}

/// Everything needed to train and score one model configuration.
#[derive(Debug, Clone)]
pub struct Protocol {
    pub spec: ModelSpec,
    pub trainer: TrainerConfig,
    pub c_grid: Vec<f64>,
    /// Pool all test sets of all resamples into one sample.
    pub pooled: bool,
}

impl Protocol {
    /// Scoring always uses every reference, whatever the training loss uses.
    pub fn eval_loss(&self) -> LossConfig {
        LossConfig {
            single_reference: false,
            ..self.spec.loss_config
        }
    }
}

fn subset(data: &[Example], ids: &[usize]) -> Vec<Example> {
    ids.iter().map(|&i| data[i].clone()).collect()
}

/// ROUGE-1 of one predicted summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetScore {
    pub set_id: String,
    pub precision: f64,
    pub recall: f64,
    pub f: f64,
}

fn score_summary(ex: &Example, y: &Summary, loss: &LossConfig) -> Result<SetScore> {
    let prf = evaluate_summary(&ex.1, y, &ex.0, loss)?;
    Ok(SetScore {
        set_id: ex.0.set_id.clone(),
        precision: prf.precision,
        recall: prf.recall,
        f: prf.f,
    })
}

/// Scores `model` on the sets `ids`.
pub fn evaluate_model(data: &[Example], ids: &[usize], model: &Model, loss: &LossConfig) -> Result<Vec<SetScore>> {
    ids.par_iter()
        .map(|&i| score_summary(&data[i], &predict(&data[i].0, model)?, loss))
        .collect()
}

/// Scores the fixed TFIDF-cosine pairwise scorer on the sets `ids`.
pub fn evaluate_baseline(
    data: &[Example],
    ids: &[usize],
    lambda: f64,
    greedy: &GreedyConfig,
    loss: &LossConfig,
) -> Result<Vec<SetScore>> {
    ids.par_iter()
        .map(|&i| score_summary(&data[i], &baseline_summary(&data[i].0, lambda, greedy), loss))
        .collect()
}

pub fn baseline_summary(x: &DocumentSet, lambda: f64, greedy: &GreedyConfig) -> Summary {
    let scorer = PairwiseScorer::tfidf_baseline(x, lambda);
    greedy_maximize(&x.costs(), &mut scorer.state(), &greedy.for_set(x))
}

/// Model trained with the C that scores best on the validation ids.
#[derive(Debug, Clone)]
pub struct Selected {
    pub c: f64,
    pub model: Model,
    pub val_f: f64,
}

pub fn select_c(data: &[Example], split: &Split, protocol: &Protocol) -> Result<Selected> {
    let train_data = subset(data, &split.train);
    let loss = protocol.eval_loss();
    let candidates: Vec<Selected> = protocol
        .c_grid
        .par_iter()
        .map(|&c| {
            let trained = train(&train_data, &protocol.spec, &protocol.trainer.clone().with_c(c))?;
            let scores = evaluate_model(data, &split.val, &trained.model, &loss)?;
            Ok(Selected {
                c,
                model: trained.model,
                val_f: mean(&scores.iter().map(|s| s.f).collect::<Vec<_>>()),
            })
        })
        .collect::<Result<_>>()?;
    // first maximum wins, so ties keep the smaller C
    let mut best: Option<Selected> = None;
    for cand in candidates {
        if best.as_ref().is_none_or(|b| cand.val_f > b.val_f) {
            best = Some(cand);
        }
    }
    best.ok_or_else(|| Error::InvalidPlan("empty C grid".into()))
}

/// Mean and standard error of per-set F.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

/// Pooled: every set is one sample. Otherwise each resample contributes its mean.
pub fn aggregate(per_resample: &[Vec<f64>], pooled: bool) -> Aggregate {
    let samples: Vec<f64> = if pooled {
        per_resample.iter().flatten().copied().collect()
    } else {
        per_resample.iter().map(|v| mean(v)).collect()
    };
    Aggregate {
        mean: mean(&samples),
        stderr: stderr(&samples),
        n: samples.len(),
    }
}

fn fs(scores: &[SetScore]) -> Vec<f64> {
    scores.iter().map(|s| s.f).collect()
}

/// Per-set scores plus their means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub sets: Vec<SetScore>,
    pub mean: Prf,
    /// Standard error of the per-set F.
    pub stderr_f: f64,
}

impl EvaluationReport {
    pub fn new(sets: Vec<SetScore>) -> Self {
        let col = |f: fn(&SetScore) -> f64| sets.iter().map(f).collect::<Vec<_>>();
        EvaluationReport {
            mean: Prf {
                precision: mean(&col(|s| s.precision)),
                recall: mean(&col(|s| s.recall)),
                f: mean(&col(|s| s.f)),
            },
            stderr_f: stderr(&col(|s| s.f)),
            sets,
        }
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("set_id\tprecision\trecall\tf\n");
        for s in &self.sets {
            let _ = writeln!(out, "{}\t{:.5}\t{:.5}\t{:.5}", s.set_id, s.precision, s.recall, s.f);
        }
        let _ = writeln!(
            out,
            "mean\t{:.5}\t{:.5}\t{:.5}\nstderr\t\t\t{:.5}",
            self.mean.precision, self.mean.recall, self.mean.f, self.stderr_f
        );
        out
    }
}

/// One predicted summary as written by `summarize`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub set_id: String,
    /// In greedy insertion order.
    pub sentence_ids: Vec<usize>,
    pub total_cost: u64,
}

impl Prediction {
    pub fn new(x: &DocumentSet, y: &Summary) -> Self {
        Prediction {
            set_id: x.set_id.clone(),
            sentence_ids: y.ids().to_vec(),
            total_cost: y.total_cost(),
        }
    }
}

pub fn parse_predictions(text: &str) -> Result<Vec<Prediction>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|source| Error::MalformedLine { line: i + 1, source }))
        .collect()
}

/// Scores stored predictions against the references of `data`.
///
/// Every prediction must name a set of `data`, each set at most once.
pub fn evaluate_predictions(data: &[Example], predictions: &[Prediction], loss: &LossConfig) -> Result<EvaluationReport> {
    let mut seen = std::collections::BTreeSet::new();
    let mut scores = Vec::with_capacity(predictions.len());
    for p in predictions {
        let ex = data
            .iter()
            .find(|(x, _)| x.set_id == p.set_id)
            .ok_or_else(|| Error::IdMismatch(format!("prediction for unknown set {:?}", p.set_id)))?;
        if !seen.insert(p.set_id.clone()) {
            return Err(Error::IdMismatch(format!("set {:?} predicted twice", p.set_id)));
        }
        let y = ex.0.summary(&p.sentence_ids)?;
        scores.push(score_summary(ex, &y, loss)?);
    }
    Ok(EvaluationReport::new(scores))
}

/// Rows of the upper-bound analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    /// Each reference scored against the others; `None` with fewer than two.
    pub human: Option<Aggregate>,
    /// Greedy ROUGE-maximizing extracts of the test sets.
    pub extractive: Aggregate,
    /// Selected model on its own training sets.
    pub model_fit: Aggregate,
    /// Selected model on the test sets.
    pub prediction: Aggregate,
}

fn fmt_row(out: &mut String, name: &str, a: Option<&Aggregate>) {
    match a {
        Some(a) => {
            let _ = writeln!(out, "{name}\t{:.5}\t{:.5}\t{}", a.mean, a.stderr, a.n);
        }
        None => {
            let _ = writeln!(out, "{name}\tn/a\tn/a\t0");
        }
    }
}

impl BoundsReport {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("row\tmean_f\tstderr\tn\n");
        fmt_row(&mut out, "human", self.human.as_ref());
        fmt_row(&mut out, "extractive", Some(&self.extractive));
        fmt_row(&mut out, "model_fit", Some(&self.model_fit));
        fmt_row(&mut out, "prediction", Some(&self.prediction));
        out
    }
}

/// Mean F of each reference against the remaining ones, or `None` with fewer than two.
pub fn human_agreement(refs: &ReferenceSet, loss: &LossConfig) -> Result<Option<f64>> {
    let counts: Vec<UnigramCounts> = refs
        .references
        .iter()
        .map(|r| UnigramCounts::from_tokens(r, loss))
        .collect();
    if counts.len() < 2 {
        return Ok(None);
    }
    let mut total = 0.0;
    for k in 0..counts.len() {
        let others: Vec<UnigramCounts> = counts
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != k)
            .map(|(_, c)| c.clone())
            .collect();
        total += rouge1_prf(&counts[k], &others)?.f;
    }
    Ok(Some(total / counts.len() as f64))
}

/// Target summaries scored against every reference.
fn extractive_scores(data: &[Example], ids: &[usize], greedy: &GreedyConfig, loss: &LossConfig) -> Result<Vec<f64>> {
    ids.par_iter()
        .map(|&i| {
            let (x, y) = &data[i];
            let mut all = y.clone();
            let target = make_target(x, &mut all, greedy, loss)?;
            Ok(evaluate_summary(y, &target, x, loss)?.f)
        })
        .collect()
}

pub fn bounds(data: &[Example], plan: &ExperimentPlan, protocol: &Protocol) -> Result<BoundsReport> {
    let loss = protocol.eval_loss();
    let greedy = &protocol.spec.greedy_config;
    // per resample: human, extractive, model fit, prediction
    let per: Vec<[Vec<f64>; 4]> = plan
        .splits
        .par_iter()
        .map(|split| {
            let selected = select_c(data, split, protocol)?;
            let fit = fs(&evaluate_model(data, &split.train, &selected.model, &loss)?);
            let pred = fs(&evaluate_model(data, &split.test, &selected.model, &loss)?);
            let extract = extractive_scores(data, &split.test, greedy, &loss)?;
            let mut human = Vec::new();
            for &i in &split.test {
                if let Some(h) = human_agreement(&data[i].1, &loss)? {
                    human.push(h);
                }
            }
            Ok([human, extract, fit, pred])
        })
        .collect::<Result<_>>()?;
    let column = |k: usize| -> Vec<Vec<f64>> { per.iter().map(|t| t[k].clone()).collect() };
    let human = column(0);
    Ok(BoundsReport {
        human: human.iter().any(|v| !v.is_empty()).then(|| {
            aggregate(&human.into_iter().filter(|v| !v.is_empty()).collect::<Vec<_>>(), protocol.pooled)
        }),
        extractive: aggregate(&column(1), protocol.pooled),
        model_fit: aggregate(&column(2), protocol.pooled),
        prediction: aggregate(&column(3), protocol.pooled),
    })
}

/// Test F of models trained on the selected model's C for one split.
pub fn test_scores(data: &[Example], split: &Split, protocol: &Protocol) -> Result<Vec<f64>> {
    let selected = select_c(data, split, protocol)?;
    Ok(fs(&evaluate_model(data, &split.test, &selected.model, &protocol.eval_loss())?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub size: usize,
    pub mean_f: f64,
    pub stderr: f64,
}

pub fn curve_to_tsv(rows: &[CurveRow]) -> String {
    let mut out = String::from("size\tmean_f\tstderr\n");
    for r in rows {
        let _ = writeln!(out, "{}\t{:.5}\t{:.5}", r.size, r.mean_f, r.stderr);
    }
    out
}

/// Learning curve: each size trains on a prefix of every split's training ids.
pub fn curve(data: &[Example], plan: &ExperimentPlan, protocol: &Protocol, sizes: &[usize]) -> Result<Vec<CurveRow>> {
    let available = plan.splits.iter().map(|s| s.train.len()).min().unwrap_or(0);
    let mut rows = Vec::new();
    for &size in sizes {
        if size == 0 || size > available {
            log::warn!("skipping curve size {size}: {available} training sets available");
            continue;
        }
        let per: Vec<Vec<f64>> = plan
            .splits
            .par_iter()
            .map(|split| {
                let truncated = Split {
                    train: split.train[..size].to_vec(),
                    ..split.clone()
                };
                test_scores(data, &truncated, protocol)
            })
            .collect::<Result<_>>()?;
        let a = aggregate(&per, protocol.pooled);
        rows.push(CurveRow {
            size,
            mean_f: a.mean,
            stderr: a.stderr,
        });
    }
    Ok(rows)
}

/// Feature subsets compared by the ablation, keyed by what is removed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Removed {
    Nothing,
    Group(Group),
    AllExceptBasic,
}

impl Removed {
    pub fn label(&self) -> String {
        match self {
            Removed::Nothing => "none".into(),
            Removed::Group(g) => g.name().into(),
            Removed::AllExceptBasic => "all except basic".into(),
        }
    }

    /// The standard rows: none, basic, all except basic, then each other group.
    pub fn standard_rows() -> Vec<Removed> {
        vec![
            Removed::Nothing,
            Removed::Group(Group::Basic),
            Removed::AllExceptBasic,
            Removed::Group(Group::Location),
            Removed::Group(Group::SentDoc),
            Removed::Group(Group::CapStopLen),
            Removed::Group(Group::MinMax),
        ]
    }

    /// Rows for the named groups, always led by the "none" row.
    pub fn rows_for(names: &[String]) -> Result<Vec<Removed>> {
        let mut rows = vec![Removed::Nothing];
        for n in names {
            let row = if n == "all except basic" || n == "all-except-basic" {
                Removed::AllExceptBasic
            } else {
                Removed::Group(n.parse()?)
            };
            if !rows.contains(&row) {
                rows.push(row);
            }
        }
        Ok(rows)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub removed: String,
    pub mean_f: f64,
    pub stderr: f64,
}

pub fn ablation_to_tsv(rows: &[AblationRow]) -> String {
    let mut out = String::from("removed\tmean_f\tstderr\n");
    for r in rows {
        let _ = writeln!(out, "{}\t{:.5}\t{:.5}", r.removed, r.mean_f, r.stderr);
    }
    out
}

pub fn ablate(data: &[Example], plan: &ExperimentPlan, protocol: &Protocol, rows: &[Removed]) -> Result<Vec<AblationRow>> {
    rows.iter()
        .map(|row| {
            let base = &protocol.spec.feature_config;
            let features = match row {
                Removed::Nothing => base.clone(),
                Removed::Group(g) => base.without(*g),
                Removed::AllExceptBasic => {
                    let mut f = base.clone();
                    f.enabled_groups.retain(|g| *g == Group::Basic);
                    f
                }
            };
            let p = Protocol {
                spec: protocol.spec.clone().with_features(features),
                ..protocol.clone()
            };
            let per: Vec<Vec<f64>> = plan
                .splits
                .par_iter()
                .map(|split| test_scores(data, split, &p))
                .collect::<Result<_>>()?;
            let a = aggregate(&per, protocol.pooled);
            Ok(AblationRow {
                removed: row.label(),
                mean_f: a.mean,
                stderr: a.stderr,
            })
        })
        .collect()
}

/// Writes `text` atomically, creating parent directories.
pub fn write_report(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    crate::learner::write_atomic(path, text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate, SynthConfig};

    fn fixture(sets: usize) -> Vec<Example> {
        let recs = generate(&SynthConfig {
            sets,
            ..Default::default()
        })
        .unwrap();
        prepare(&recs, &Stopwords::default(), &GreedyConfig::default(), &LossConfig::default()).unwrap()
    }

    fn plan(n: usize, sizes: SplitSizes, resamples: usize, seed: u64) -> ExperimentPlan {
        ExperimentPlan::new("d", n, sizes, resamples, ModelKind::Pairwise, vec![1.0, 10.0], &GreedyConfig::default(), seed)
            .unwrap()
    }

    #[test]
    fn splits_are_disjoint_and_seeded() {
        let sizes = SplitSizes { train: 5, val: 2, test: 3 };
        let a = plan(12, sizes, 4, 7);
        assert_eq!(a, plan(12, sizes, 4, 7));
        assert_ne!(a.splits, plan(12, sizes, 4, 8).splits);
        for s in &a.splits {
            let mut all: Vec<usize> = s.train.iter().chain(&s.val).chain(&s.test).copied().collect();
            all.sort_unstable();
            all.dedup();
            assert_eq!(all.len(), 10);
        }
        assert!(ExperimentPlan::new("d", 5, sizes, 1, ModelKind::Pairwise, vec![1.0], &GreedyConfig::default(), 0).is_err());
    }

    #[test]
    fn aggregation_modes() {
        let per = vec![vec![1.0, 0.0], vec![0.5, 0.5, 0.5]];
        let pooled = aggregate(&per, true);
        assert_eq!(pooled.n, 5);
        assert!((pooled.mean - 0.5).abs() < 1e-15);
        let resampled = aggregate(&per, false);
        assert_eq!(resampled.n, 2);
        assert_eq!(resampled.stderr, 0.0);
    }

    #[test]
    fn evaluation_report_stderr() {
        let scores: Vec<SetScore> = [0.2, 0.4, 0.9]
            .iter()
            .enumerate()
            .map(|(i, &f)| SetScore {
                set_id: i.to_string(),
                precision: f,
                recall: f,
                f,
            })
            .collect();
        let r = EvaluationReport::new(scores);
        assert!((r.stderr_f - stderr(&[0.2, 0.4, 0.9])).abs() < 1e-15);
        assert!(r.to_tsv().starts_with("set_id\tprecision"));
    }

    #[test]
    fn perfect_predictions_score_one() {
        let sw = Stopwords::default();
        let rec = DatasetRecord {
            set_id: "a".into(),
            documents: vec!["Apple banana. Cherry date. Kiwi fig.".into()],
            references: vec!["Apple banana. Kiwi fig.".into()],
            budget_bytes: None,
        };
        let data = prepare(&[rec], &sw, &GreedyConfig::default(), &LossConfig::default()).unwrap();
        let preds = vec![Prediction {
            set_id: "a".into(),
            sentence_ids: vec![0, 2],
            total_cost: 0,
        }];
        let r = evaluate_predictions(&data, &preds, &LossConfig::default()).unwrap();
        assert_eq!(r.mean.f, 1.0);
        let bad = vec![Prediction {
            set_id: "b".into(),
            ..preds[0].clone()
        }];
        assert!(matches!(evaluate_predictions(&data, &bad, &LossConfig::default()), Err(Error::IdMismatch(_))));
        let twice = vec![preds[0].clone(), preds[0].clone()];
        assert!(evaluate_predictions(&data, &twice, &LossConfig::default()).is_err());
    }

    #[test]
    fn identical_references_agree_fully() {
        let y = ReferenceSet::from_texts("a", &["red fox", "red fox", "red fox"], &Stopwords::default()).unwrap();
        assert_eq!(human_agreement(&y, &LossConfig::default()).unwrap(), Some(1.0));
        let one = ReferenceSet::from_texts("a", &["red fox"], &Stopwords::default()).unwrap();
        assert_eq!(human_agreement(&one, &LossConfig::default()).unwrap(), None);
    }

    #[test]
    fn ablation_rows_and_errors() {
        let labels: Vec<String> = Removed::standard_rows().iter().map(Removed::label).collect();
        assert_eq!(
            labels,
            ["none", "basic", "all except basic", "location", "sent+doc", "cap+stop+len", "minmax"]
        );
        let err = Removed::rows_for(&["colour".into()]).unwrap_err().to_string();
        assert!(err.contains("cap+stop+len"));
    }

    #[test]
    fn small_protocol_runs_and_is_deterministic() {
        let data = fixture(8);
        let p = plan(8, SplitSizes { train: 3, val: 2, test: 3 }, 2, 1);
        let protocol = Protocol {
            spec: ModelSpec::new(ModelKind::Pairwise),
            trainer: TrainerConfig::default(),
            c_grid: p.c_grid.clone(),
            pooled: false,
        };
        let a = curve(&data, &p, &protocol, &[1, 3, 9]).unwrap();
        assert_eq!(a.iter().map(|r| r.size).collect::<Vec<_>>(), vec![1, 3]);
        assert_eq!(a, curve(&data, &p, &protocol, &[1, 3, 9]).unwrap());
        let b = bounds(&data, &p, &protocol).unwrap();
        assert!(b.extractive.mean + 1e-12 >= b.model_fit.mean);
        assert!(b.model_fit.mean + 1e-12 >= b.prediction.mean);
        assert!(b.human.is_some());
    }
}
