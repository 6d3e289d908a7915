//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use std::collections::HashMap;
use std::path::PathBuf;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// ROUGE-1 F by explicit clipped counting, averaged over references.
pub fn brute_rouge1_f(candidate: &[&str], references: &[Vec<&str>]) -> f64 {
    let count = |words: &[&str]| {
        let mut m: HashMap<String, i64> = HashMap::new();
        for w in words {
            *m.entry(w.to_string()).or_default() += 1;
        }
        m
    };
    let cand = count(candidate);
    let mut total = 0.0;
    for r in references {
        let refc = count(r);
        let overlap: i64 = cand.iter().map(|(w, &c)| c.min(*refc.get(w).unwrap_or(&0))).sum();
        let p = if candidate.is_empty() { 0.0 } else { overlap as f64 / candidate.len() as f64 };
        let rec = if r.is_empty() { 0.0 } else { overlap as f64 / r.len() as f64 };
        total += if p + rec == 0.0 { 0.0 } else { 2.0 * p * rec / (p + rec) };
    }
    total / references.len() as f64
}

/// Projection onto `{x ≥ 0, Σ x ≤ cap}`.
fn project(v: &[f64], cap: f64) -> Vec<f64> {
    let pos: Vec<f64> = v.iter().map(|x| x.max(0.0)).collect();
    if pos.iter().sum::<f64>() <= cap {
        return pos;
    }
    let (mut lo, mut hi) = (0.0, v.iter().cloned().fold(0.0, f64::max));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if v.iter().map(|x| (x - mid).max(0.0)).sum::<f64>() > cap {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    v.iter().map(|x| (x - hi).max(0.0)).collect()
}

/// Dual optimum of the n-slack QP by dense accelerated projected gradient.
///
/// `groups[i]` holds `(loss, Δψ)` of example `i`; each group's multipliers
/// share the budget `cap`.
pub fn reference_dual(groups: &[Vec<(f64, Vec<f64>)>], cap: f64) -> f64 {
    let flat: Vec<(usize, f64, &Vec<f64>)> = groups
        .iter()
        .enumerate()
        .flat_map(|(i, g)| g.iter().map(move |(l, v)| (i, *l, v)))
        .collect();
    let m = flat.len();
    let mut gram = vec![0.0; m * m];
    for a in 0..m {
        for b in 0..m {
            gram[a * m + b] = flat[a].2.iter().zip(flat[b].2).map(|(x, y)| x * y).sum();
        }
    }
    let objective = |alpha: &[f64]| {
        let mut quad = 0.0;
        for a in 0..m {
            for b in 0..m {
                quad += alpha[a] * alpha[b] * gram[a * m + b];
            }
        }
        (0..m).map(|a| alpha[a] * flat[a].1).sum::<f64>() - 0.5 * quad
    };
    let lipschitz = (0..m)
        .map(|a| gram[a * m..(a + 1) * m].iter().map(|v| v.abs()).sum::<f64>())
        .fold(1e-12, f64::max);
    let members: Vec<Vec<usize>> = (0..groups.len())
        .map(|i| (0..m).filter(|&a| flat[a].0 == i).collect())
        .collect();
    let mut alpha = vec![0.0; m];
    let mut y = alpha.clone();
    let mut t = 1.0f64;
    for _ in 0..20_000 {
        let mut next = vec![0.0; m];
        for idx in &members {
            let v: Vec<f64> = idx
                .iter()
                .map(|&a| y[a] + (flat[a].1 - (0..m).map(|b| gram[a * m + b] * y[b]).sum::<f64>()) / lipschitz)
                .collect();
            for (&a, p) in idx.iter().zip(project(&v, cap)) {
                next[a] = p;
            }
        }
        if objective(&next) < objective(&alpha) {
            t = 1.0;
            y = alpha.clone();
            continue;
        }
        let moved = next.iter().zip(&alpha).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        y = (0..m).map(|a| next[a] + (t - 1.0) / t_next * (next[a] - alpha[a])).collect();
        t = t_next;
        alpha = next;
        if moved < 1e-12 {
            break;
        }
    }
    objective(&alpha)
}
