//! Large-margin training of the scoring functions.
//!
//! An n-slack structural SVM with margin rescaling: every training example
//! keeps its own working set of constraints, the most violated constraint is
//! found by loss-augmented greedy inference, and the QP over the working sets
//! is re-solved whenever a constraint is added.

pub mod qp;

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write as _;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{DocumentSet, ReferenceSet};
use crate::error::{Error, Result};
use crate::features::{
    CoverageTable, FeatureConfig, FeatureRegistry, FeatureSpace, FeatureVector, PairwiseTable, TradeOff,
};
use crate::greedy::{greedy_maximize, GreedyConfig, SumGain};
use crate::rouge::{evaluate_summary, loss_delta, LossConfig, LossState};
use crate::scoring::{CoverageScorer, PairwiseScorer, Scorer, Summary};

pub use qp::{solve_qp, QpSolution, TrainerConfig, WorkingSet};

/// Default redundancy trade-off for fixed-λ pairwise models.
pub const DEFAULT_LAMBDA: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// Pairwise similarity with a fixed redundancy weight λ.
    Pairwise,
    /// Pairwise similarity with separately learned redundancy weights.
    PairwiseSplit,
    Coverage,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Pairwise => "pairwise",
            ModelKind::PairwiseSplit => "pairwise-split",
            ModelKind::Coverage => "coverage",
        }
    }

    pub fn space(self) -> FeatureSpace {
        match self {
            ModelKind::Coverage => FeatureSpace::Coverage,
            _ => FeatureSpace::Pairwise,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        [ModelKind::Pairwise, ModelKind::PairwiseSplit, ModelKind::Coverage]
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown model {s:?}; expected pairwise, pairwise-split or coverage"))
    }
}

/// Everything about a model except its weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub kind: ModelKind,
    /// Present exactly for [`ModelKind::Pairwise`].
    pub lambda: Option<f64>,
    pub feature_config: FeatureConfig,
    pub loss_config: LossConfig,
    pub greedy_config: GreedyConfig,
    /// Clamp negative similarities or word weights at prediction time.
    pub clamp_negative: bool,
}

impl ModelSpec {
    pub fn new(kind: ModelKind) -> Self {
        ModelSpec {
            kind,
            lambda: (kind == ModelKind::Pairwise).then_some(DEFAULT_LAMBDA),
            feature_config: FeatureConfig::default(),
            loss_config: LossConfig::default(),
            greedy_config: GreedyConfig::default(),
            clamp_negative: true,
        }
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        if self.kind == ModelKind::Pairwise {
            self.lambda = Some(lambda);
        }
        self
    }

    pub fn with_features(mut self, cfg: FeatureConfig) -> Self {
        self.feature_config = cfg;
        self
    }

    pub fn with_greedy(mut self, cfg: GreedyConfig) -> Self {
        self.greedy_config = cfg;
        self
    }

    pub fn with_loss(mut self, cfg: LossConfig) -> Self {
        self.loss_config = cfg;
        self
    }

    pub fn trade_off(&self) -> Option<TradeOff> {
        match self.kind {
            ModelKind::Pairwise => Some(TradeOff::Fixed {
                lambda: self.lambda.unwrap_or(DEFAULT_LAMBDA),
            }),
            ModelKind::PairwiseSplit => Some(TradeOff::Split),
            ModelKind::Coverage => None,
        }
    }

    pub fn dim(&self) -> usize {
        let base = FeatureRegistry::new(&self.feature_config, self.kind.space()).dim();
        match self.kind {
            ModelKind::PairwiseSplit => 2 * base,
            _ => base,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.feature_config.validate()?;
        match (self.kind, self.lambda) {
            (ModelKind::Pairwise, Some(l)) if l > 0.0 && l.is_finite() => {}
            (ModelKind::Pairwise, _) => {
                return Err(Error::InvalidFeatureConfig("pairwise models need λ > 0".into()))
            }
            (_, Some(_)) => {
                return Err(Error::InvalidFeatureConfig(format!(
                    "λ is only meaningful for pairwise models, not {}",
                    self.kind
                )))
            }
            _ => {}
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub spec: ModelSpec,
    pub weights: Vec<f64>,
}

/// On-disk layout of a model.
#[derive(Serialize, Deserialize)]
struct ModelFile {
    model_kind: ModelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lambda: Option<f64>,
    feature_config: FeatureConfig,
    loss_config: LossConfig,
    greedy_config: GreedyConfig,
    clamp_negative: bool,
    dim: usize,
    weights: BTreeMap<usize, f64>,
}

impl Model {
    pub fn zeros(spec: ModelSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Model {
            weights: vec![0.0; spec.dim()],
            spec,
        })
    }

    /// Every weight set to 1.
    pub fn uniform(spec: ModelSpec) -> Result<Self> {
        let mut m = Model::zeros(spec)?;
        m.weights.fill(1.0);
        Ok(m)
    }

    pub fn with_weights(spec: ModelSpec, weights: Vec<f64>) -> Result<Self> {
        let m = Model { spec, weights };
        m.validate()?;
        Ok(m)
    }

    pub fn kind(&self) -> ModelKind {
        self.spec.kind
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        let registry = self.spec.dim();
        if self.weights.len() != registry {
            return Err(Error::DimensionMismatch {
                model: self.weights.len(),
                registry,
            });
        }
        if self.weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidTrainerConfig("model has non-finite weights".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let s = &self.spec;
        let file = ModelFile {
            model_kind: s.kind,
            lambda: s.lambda,
            feature_config: s.feature_config.clone(),
            loss_config: s.loss_config,
            greedy_config: s.greedy_config.clone(),
            clamp_negative: s.clamp_negative,
            dim: self.weights.len(),
            weights: self
                .weights
                .iter()
                .enumerate()
                .filter(|(_, &w)| w != 0.0)
                .map(|(i, &w)| (i, w))
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&file)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        let spec = ModelSpec {
            kind: file.model_kind,
            lambda: file.lambda,
            feature_config: file.feature_config,
            loss_config: file.loss_config,
            greedy_config: file.greedy_config,
            clamp_negative: file.clamp_negative,
        };
        let registry = spec.dim();
        if file.dim != registry {
            return Err(Error::DimensionMismatch {
                model: file.dim,
                registry,
            });
        }
        let mut weights = vec![0.0; file.dim];
        for (i, w) in file.weights {
            if i >= file.dim {
                return Err(Error::DimensionMismatch {
                    model: i + 1,
                    registry,
                });
            }
            weights[i] = w;
        }
        Model::with_weights(spec, weights)
    }

    /// Writes through a temporary file so a failure never leaves a partial model.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path.as_ref(), self.to_json()?.as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Model::from_json(&text)
    }
}

/// Writes `bytes` to `path` via a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Precomputed features of one document set for one model kind.
#[derive(Debug, Clone)]
pub enum Instance {
    Pairwise { table: PairwiseTable, trade_off: TradeOff },
    Coverage { table: CoverageTable },
}

impl Instance {
    pub fn new(x: &DocumentSet, spec: &ModelSpec) -> Self {
        match spec.trade_off() {
            Some(trade_off) => Instance::Pairwise {
                table: PairwiseTable::build(x, &spec.feature_config),
                trade_off,
            },
            None => Instance::Coverage {
                table: CoverageTable::build(x, &spec.feature_config),
            },
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Instance::Pairwise { table, trade_off } => table.psi_dim(*trade_off),
            Instance::Coverage { table } => table.dim(),
        }
    }

    /// `Ψ(x, y)`.
    pub fn psi(&self, y: &Summary) -> FeatureVector {
        match self {
            Instance::Pairwise { table, trade_off } => table.psi(y, *trade_off),
            Instance::Coverage { table } => table.psi(y),
        }
    }

    /// Scorer whose value equals `w · Ψ(x, y)` when nothing is clamped.
    pub fn scorer(&self, x: &DocumentSet, w: &[f64], clamp_negative: bool) -> Scorer {
        match self {
            Instance::Pairwise {
                table,
                trade_off: TradeOff::Fixed { lambda },
            } => Scorer::Pairwise(PairwiseScorer::new(table.sigma(w), *lambda, clamp_negative)),
            Instance::Pairwise {
                table,
                trade_off: TradeOff::Split,
            } => {
                let (cross, red) = w.split_at(table.dim());
                Scorer::Pairwise(
                    PairwiseScorer::new(table.sigma(cross), 1.0, clamp_negative).with_redundancy(table.sigma(red)),
                )
            }
            Instance::Coverage { table } => Scorer::Coverage(CoverageScorer::new(x, table.omega(w), clamp_negative)),
        }
    }
}

/// A margin constraint `w · dψ ≥ Δ − ξ_i` for example `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub example_index: usize,
    pub y_hat: Summary,
    /// `Ψ(x, ŷ)`.
    pub psi_hat: FeatureVector,
    /// `Δ(Y, ŷ)`.
    pub loss: f64,
    /// `Ψ(x, y_target) − Ψ(x, ŷ)`.
    pub delta_psi: FeatureVector,
}

/// `Δ − w · dψ − ξ_i`; the outer loop adds the constraint when this exceeds ε.
pub fn violation(constraint: &Constraint, w: &[f64], xi: f64) -> f64 {
    constraint.loss - constraint.delta_psi.dot(w) - xi
}

/// Training example with features, target and loss state prepared once.
struct Example<'a> {
    index: usize,
    x: &'a DocumentSet,
    refs: &'a ReferenceSet,
    instance: Instance,
    target_psi: FeatureVector,
    loss: LossState,
    greedy: GreedyConfig,
}

impl<'a> Example<'a> {
    fn new(index: usize, x: &'a DocumentSet, refs: &'a ReferenceSet, spec: &ModelSpec) -> Result<Self> {
        let target = refs
            .target
            .as_ref()
            .ok_or_else(|| Error::MissingTarget(refs.set_id.clone()))?;
        let instance = Instance::new(x, spec);
        Ok(Example {
            index,
            x,
            refs,
            target_psi: instance.psi(target),
            instance,
            loss: LossState::new(x, refs, &spec.loss_config)?,
            greedy: spec.greedy_config.for_set(x),
        })
    }

    /// Loss-augmented greedy: `argmax_y w · Ψ(x, y) + Δ(Y, y)`.
    fn most_violated(&self, w: &[f64], loss_config: &LossConfig) -> Result<Constraint> {
        let scorer = self.instance.scorer(self.x, w, false);
        let mut gain = SumGain(scorer.state(), self.loss.clone());
        let y_hat = greedy_maximize(&self.x.costs(), &mut gain, &self.greedy);
        let psi_hat = self.instance.psi(&y_hat);
        Ok(Constraint {
            example_index: self.index,
            loss: loss_delta(self.refs, &y_hat, self.x, loss_config)?,
            delta_psi: self.target_psi.sub(&psi_hat),
            psi_hat,
            y_hat,
        })
    }

    fn predict(&self, w: &[f64], clamp_negative: bool) -> Summary {
        let scorer = self.instance.scorer(self.x, w, clamp_negative);
        greedy_maximize(&self.x.costs(), &mut scorer.state(), &self.greedy)
    }
}

/// Most violated constraint for one example under `model`.
pub fn separation_oracle(x: &DocumentSet, refs: &ReferenceSet, model: &Model) -> Result<Constraint> {
    model.validate()?;
    Example::new(0, x, refs, &model.spec)?.most_violated(&model.weights, &model.spec.loss_config)
}

/// Greedy summary maximizing `w · Ψ(x, y)` within the budget.
pub fn predict(x: &DocumentSet, model: &Model) -> Result<Summary> {
    model.validate()?;
    let instance = Instance::new(x, &model.spec);
    if instance.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            model: model.dim(),
            registry: instance.dim(),
        });
    }
    let scorer = instance.scorer(x, &model.weights, model.spec.clamp_negative);
    Ok(greedy_maximize(
        &x.costs(),
        &mut scorer.state(),
        &model.spec.greedy_config.for_set(x),
    ))
}

/// One line of the training log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationLog {
    pub iteration: usize,
    pub constraints_added: usize,
    pub constraints_total: usize,
    pub dual_objective: f64,
    pub max_violation: f64,
    pub train_rouge1f: f64,
}

#[derive(Debug, Clone)]
pub struct Trained {
    pub model: Model,
    pub log: Vec<IterationLog>,
    /// Dual objective after every QP solve, in order.
    pub duals: Vec<f64>,
    /// False when `max_outer_iters` ran out first.
    pub converged: bool,
    pub working_set: WorkingSet,
}

/// Cutting-plane training.
///
/// Starting from empty working sets and `w = 0`, each pass asks every
/// example for its most violated constraint and adds it when the violation
/// exceeds ε. By default the QP is re-solved right after each addition; with
/// `trainer.batch` the oracles of one pass run in parallel against the same
/// `w` and the QP is solved once at the end of the pass. Training stops after
/// a pass that adds nothing.
pub fn train(data: &[(DocumentSet, ReferenceSet)], spec: &ModelSpec, trainer: &TrainerConfig) -> Result<Trained> {
    spec.validate()?;
    trainer.validate()?;
    if data.is_empty() {
        return Err(Error::NoTrainingData);
    }
    let examples: Vec<Example> = data
        .par_iter()
        .enumerate()
        .map(|(i, (x, refs))| Example::new(i, x, refs, spec))
        .collect::<Result<_>>()?;
    let dim = spec.dim();
    let mut ws = WorkingSet::new(examples.len(), dim);
    let mut w = vec![0.0; dim];
    let mut duals = Vec::new();
    let mut log = Vec::new();
    let mut dual = 0.0;
    let mut converged = false;

    for iteration in 1..=trainer.max_outer_iters {
        let mut added = 0;
        let mut max_violation = f64::NEG_INFINITY;
        if trainer.batch {
            let found: Vec<Constraint> = examples
                .par_iter()
                .map(|ex| ex.most_violated(&w, &spec.loss_config))
                .collect::<Result<_>>()?;
            for c in found {
                let v = violation(&c, &w, ws.xi(c.example_index, &w));
                max_violation = max_violation.max(v);
                if v > trainer.epsilon {
                    ws.add(c)?;
                    added += 1;
                }
            }
            if added > 0 {
                let sol = solve_qp(&mut ws, trainer)?;
                dual = sol.dual;
                duals.push(dual);
                w = sol.w;
            }
        } else {
            for ex in &examples {
                let c = ex.most_violated(&w, &spec.loss_config)?;
                let v = violation(&c, &w, ws.xi(ex.index, &w));
                max_violation = max_violation.max(v);
                if v > trainer.epsilon {
                    ws.add(c)?;
                    added += 1;
                    let sol = solve_qp(&mut ws, trainer)?;
                    dual = sol.dual;
                    duals.push(dual);
                    w = sol.w;
                }
            }
        }

        let train_rouge1f = examples
            .par_iter()
            .map(|ex| {
                let y = ex.predict(&w, spec.clamp_negative);
                evaluate_summary(ex.refs, &y, ex.x, &spec.loss_config).map(|p| p.f)
            })
            .collect::<Result<Vec<f64>>>()?
            .iter()
            .sum::<f64>()
            / examples.len() as f64;
        let entry = IterationLog {
            iteration,
            constraints_added: added,
            constraints_total: ws.len(),
            dual_objective: dual,
            max_violation,
            train_rouge1f,
        };
        log::info!(
            "iteration {iteration}: +{added} constraints ({} total), dual {dual:.6}, max violation {max_violation:.6}, train F {train_rouge1f:.4}",
            ws.len()
        );
        log.push(entry);
        if added == 0 {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!(
            "training stopped after {} outer iterations without convergence; returning the current model",
            trainer.max_outer_iters
        );
    }
    Ok(Trained {
        model: Model::with_weights(spec.clone(), w)?,
        log,
        duals,
        converged,
        working_set: ws,
    })
}
