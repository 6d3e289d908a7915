//! Dual of the n-slack margin-rescaling QP over a working set.
//!
//! ```text
//! max_α  Σ α_ic Δ_ic − ½ ‖Σ α_ic dψ_ic‖²
//! s.t.   α_ic ≥ 0,  Σ_c α_ic ≤ C/n  for every example i
//! ```
//!
//! Solved by clipped coordinate ascent. When an example's budget `C/n` is
//! exhausted a single coordinate cannot move without leaving the feasible set,
//! so each pass also shifts mass between the most and least violated
//! constraints of that example. The solver stops once the primal-dual gap
//! drops below `qp_tol · (1 + |dual|)`.

use serde::{Deserialize, Serialize};

use super::Constraint;
use crate::error::{Error, Result};
use crate::features::FeatureVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainerConfig {
    /// Regularization trade-off `C > 0`.
    #[serde(rename = "C")]
    pub c: f64,
    /// Constraint tolerance of the outer loop.
    pub epsilon: f64,
    pub max_outer_iters: usize,
    /// Relative primal-dual gap at which the QP stops.
    pub qp_tol: f64,
    pub qp_max_passes: usize,
    /// Solve once per pass over all examples instead of after every new
    /// constraint.
    #[serde(default)]
    pub batch: bool,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        TrainerConfig {
            c: 1.0,
            epsilon: 1e-3,
            max_outer_iters: 100,
            qp_tol: 1e-9,
            qp_max_passes: 100_000,
            batch: false,
        }
    }
}

impl TrainerConfig {
    pub fn with_c(mut self, c: f64) -> Self {
        self.c = c;
        self
    }

    // negated comparisons so that NaN fails too
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidTrainerConfig(m.to_string()));
        if !(self.c > 0.0 && self.c.is_finite()) {
            return bad("C must be positive and finite");
        }
        if !(self.epsilon > 0.0) {
            return bad("epsilon must be positive");
        }
        if !(self.qp_tol > 0.0) {
            return bad("qp_tol must be positive");
        }
        if self.max_outer_iters == 0 || self.qp_max_passes == 0 {
            return bad("iteration limits must be positive");
        }
        Ok(())
    }
}

/// Constraints per example with their dual variables.
#[derive(Debug, Clone)]
pub struct WorkingSet {
    dim: usize,
    constraints: Vec<Vec<Constraint>>,
    alpha: Vec<Vec<f64>>,
    norms: Vec<Vec<f64>>,
}

impl WorkingSet {
    pub fn new(num_examples: usize, dim: usize) -> Self {
        WorkingSet {
            dim,
            constraints: vec![Vec::new(); num_examples],
            alpha: vec![Vec::new(); num_examples],
            norms: vec![Vec::new(); num_examples],
        }
    }

    pub fn num_examples(&self) -> usize {
        self.constraints.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.constraints.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Adds a constraint with `α = 0`.
    pub fn add(&mut self, c: Constraint) -> Result<()> {
        let i = c.example_index;
        if !c.delta_psi.is_finite() || !c.loss.is_finite() {
            return Err(Error::NonFinite(i));
        }
        if c.delta_psi.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                model: c.delta_psi.dim(),
                registry: self.dim,
            });
        }
        self.norms[i].push(c.delta_psi.norm_sq());
        self.alpha[i].push(0.0);
        self.constraints[i].push(c);
        Ok(())
    }

    pub fn constraints(&self, i: usize) -> &[Constraint] {
        &self.constraints[i]
    }

    pub fn alpha(&self, i: usize) -> &[f64] {
        &self.alpha[i]
    }

    /// `Σ α · dψ`.
    pub fn weights(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.dim];
        for (cs, alphas) in self.constraints.iter().zip(&self.alpha) {
            for (c, &a) in cs.iter().zip(alphas) {
                if a != 0.0 {
                    c.delta_psi.add_to(&mut w, a);
                }
            }
        }
        w
    }

    /// `ξ_i = max(0, max_c (Δ_c − w · dψ_c))`.
    pub fn xi(&self, i: usize, w: &[f64]) -> f64 {
        self.constraints[i]
            .iter()
            .map(|c| c.loss - c.delta_psi.dot(w))
            .fold(0.0, f64::max)
    }

    pub fn dual_objective(&self, w: &[f64]) -> f64 {
        let linear: f64 = self
            .constraints
            .iter()
            .zip(&self.alpha)
            .flat_map(|(cs, a)| cs.iter().zip(a).map(|(c, a)| a * c.loss))
            .sum();
        linear - 0.5 * w.iter().map(|v| v * v).sum::<f64>()
    }

    pub fn primal_objective(&self, w: &[f64], cap: f64) -> f64 {
        0.5 * w.iter().map(|v| v * v).sum::<f64>()
            + cap * (0..self.num_examples()).map(|i| self.xi(i, w)).sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpSolution {
    pub w: Vec<f64>,
    pub xi: Vec<f64>,
    pub dual: f64,
    pub primal: f64,
    pub passes: usize,
}

/// Moves `α_ic` to its clipped optimum; returns the dual increase.
fn coordinate_step(ws: &mut WorkingSet, w: &mut [f64], i: usize, c: usize, cap: f64) -> f64 {
    let con = &ws.constraints[i][c];
    let g = con.loss - con.delta_psi.dot(w);
    let norm = ws.norms[i][c];
    let a = ws.alpha[i][c];
    let others: f64 = ws.alpha[i].iter().sum::<f64>() - a;
    let hi = (cap - others).max(0.0);
    let target = if norm > 0.0 {
        a + g / norm
    } else if g > 0.0 {
        hi
    } else {
        0.0
    };
    let new = target.clamp(0.0, hi);
    let step = new - a;
    if step == 0.0 {
        return 0.0;
    }
    con.delta_psi.add_to(w, step);
    ws.alpha[i][c] = new;
    step * g - 0.5 * step * step * norm
}

/// Moves mass from constraint `d` to `c` of example `i`; returns the dual increase.
fn transfer_step(ws: &mut WorkingSet, w: &mut [f64], i: usize, c: usize, d: usize) -> f64 {
    let (cc, cd) = (&ws.constraints[i][c], &ws.constraints[i][d]);
    let gap = (cc.loss - cc.delta_psi.dot(w)) - (cd.loss - cd.delta_psi.dot(w));
    let curvature = ws.norms[i][c] + ws.norms[i][d] - 2.0 * cc.delta_psi.dot_sparse(&cd.delta_psi);
    let (ac, ad) = (ws.alpha[i][c], ws.alpha[i][d]);
    let t = if curvature > 1e-14 {
        gap / curvature
    } else if gap > 0.0 {
        ad
    } else {
        -ac
    };
    let t = t.clamp(-ac, ad);
    if t == 0.0 {
        return 0.0;
    }
    cc.delta_psi.add_to(w, t);
    cd.delta_psi.add_to(w, -t);
    ws.alpha[i][c] = ac + t;
    ws.alpha[i][d] = ad - t;
    t * gap - 0.5 * t * t * curvature.max(0.0)
}

/// Best pair of constraints for a mass transfer, if the example's budget binds.
fn transfer_pair(ws: &WorkingSet, w: &[f64], i: usize, cap: f64) -> Option<(usize, usize)> {
    let alphas = &ws.alpha[i];
    if alphas.len() < 2 || alphas.iter().sum::<f64>() < cap * (1.0 - 1e-12) {
        return None;
    }
    let grads: Vec<f64> = ws.constraints[i]
        .iter()
        .map(|c| c.loss - c.delta_psi.dot(w))
        .collect();
    let up = (0..grads.len()).max_by(|&a, &b| grads[a].total_cmp(&grads[b]).then(b.cmp(&a)))?;
    let down = (0..grads.len())
        .filter(|&d| alphas[d] > 0.0 && d != up)
        .min_by(|&a, &b| grads[a].total_cmp(&grads[b]).then(a.cmp(&b)))?;
    (grads[up] > grads[down]).then_some((up, down))
}

/// Re-optimizes the dual, warm-started from the stored `α`.
pub fn solve_qp(ws: &mut WorkingSet, cfg: &TrainerConfig) -> Result<QpSolution> {
    cfg.validate()?;
    if ws.is_empty() {
        return Err(Error::EmptyWorkingSet);
    }
    let cap = cfg.c / ws.num_examples() as f64;
    let mut w = ws.weights();
    let mut passes = 0;
    while passes < cfg.qp_max_passes {
        passes += 1;
        for i in 0..ws.num_examples() {
            for c in 0..ws.constraints[i].len() {
                coordinate_step(ws, &mut w, i, c, cap);
            }
            for _ in 0..ws.constraints[i].len() {
                match transfer_pair(ws, &w, i, cap) {
                    Some((c, d)) => {
                        if transfer_step(ws, &mut w, i, c, d) <= 0.0 {
                            break;
                        }
                    }
                    None => break,
                }
            }
        }
        if gap(ws, &w, cap) <= cfg.qp_tol * (1.0 + ws.dual_objective(&w).abs()) {
            break;
        }
    }
    // rebuild from α so rounding never accumulates across solves
    let w = ws.weights();
    let dual = ws.dual_objective(&w);
    let primal = ws.primal_objective(&w, cap);
    if passes == cfg.qp_max_passes && primal - dual > cfg.qp_tol * (1.0 + dual.abs()) {
        log::warn!(
            "QP stopped after {passes} passes with gap {:.3e}",
            primal - dual
        );
    }
    let xi = (0..ws.num_examples()).map(|i| ws.xi(i, &w)).collect();
    Ok(QpSolution {
        w,
        xi,
        dual,
        primal,
        passes,
    })
}

/// `primal − dual = Σ_i (cap · ξ_i − Σ_c α_ic (Δ_ic − w · dψ_ic))`.
fn gap(ws: &WorkingSet, w: &[f64], cap: f64) -> f64 {
    (0..ws.num_examples())
        .map(|i| {
            let used: f64 = ws.constraints[i]
                .iter()
                .zip(&ws.alpha[i])
                .map(|(c, a)| a * (c.loss - c.delta_psi.dot(w)))
                .sum();
            cap * ws.xi(i, w) - used
        })
        .sum()
}

/// Sparse vector helper for tests and callers building constraints by hand.
pub fn constraint(example_index: usize, loss: f64, delta_psi: FeatureVector) -> Constraint {
    Constraint {
        example_index,
        y_hat: Default::default(),
        psi_hat: FeatureVector::zeros(delta_psi.dim()),
        loss,
        delta_psi,
    }
}
