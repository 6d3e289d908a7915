//! Acceptance gate. Prints one PASS/FAIL/SKIP line per criterion and exits
//! nonzero when any criterion fails.

mod common;

use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use submodsum::corpus::{load_records, DocumentSet, Stopwords};
use submodsum::experiment::{
    bounds, curve, evaluate_baseline, evaluate_model, prepare, select_c, Example, ExperimentPlan, Protocol,
    SplitSizes, DEFAULT_C_GRID,
};
use submodsum::features::FeatureVector;
use submodsum::greedy::{greedy_maximize, GreedyConfig};
use submodsum::learner::qp::constraint;
use submodsum::learner::{predict, solve_qp, train, Model, ModelKind, ModelSpec, TrainerConfig, WorkingSet};
use submodsum::rouge::{rouge1_prf, LossConfig, UnigramCounts};
use submodsum::scoring::{CoverageScorer, CoverageSets, PairwiseScorer, SimMatrix, Summary};
use submodsum::stats::mean;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(elapsed: Duration, limit: Duration, detail: String) -> Outcome {
    check(elapsed <= limit, format!("{detail}, {:.1}s of {}s", elapsed.as_secs_f64(), limit.as_secs()))
}

#[derive(Deserialize)]
struct Expected {
    seed: u64,
    learning_margin: f64,
}

fn expected() -> Expected {
    let text = std::fs::read_to_string(common::fixture("expected_results.json")).expect("expected results");
    serde_json::from_str(&text).expect("expected results parse")
}

fn fixture_data(loss: &LossConfig) -> Vec<Example> {
    let records = load_records(common::fixture("synthetic.jsonl")).expect("fixture");
    prepare(&records, &Stopwords::default(), &GreedyConfig::default(), loss).expect("targets")
}

fn protocol() -> Protocol {
    Protocol {
        spec: ModelSpec::new(ModelKind::Pairwise),
        trainer: TrainerConfig::default(),
        c_grid: DEFAULT_C_GRID.to_vec(),
        pooled: false,
    }
}

fn plan(n: usize, resamples: usize, seed: u64) -> ExperimentPlan {
    ExperimentPlan::new(
        common::fixture("synthetic.jsonl"),
        n,
        SplitSizes::default(),
        resamples,
        ModelKind::Pairwise,
        DEFAULT_C_GRID.to_vec(),
        &GreedyConfig::default(),
        seed,
    )
    .expect("plan")
}

fn summary(ids: &[usize]) -> Summary {
    let mut s = Summary::default();
    for &i in ids {
        s.push(i, 1);
    }
    s
}

/// Random `s ⊆ t` and `u ∉ t` over `0..n`.
fn nested(rng: &mut ChaCha8Rng, n: usize) -> (Vec<usize>, Vec<usize>, usize) {
    let mut ids: Vec<usize> = (0..n).collect();
    ids.shuffle(rng);
    let u = ids.pop().unwrap();
    let t_len = rng.gen_range(0..=ids.len());
    let s_len = rng.gen_range(0..=t_len);
    (ids[..s_len].to_vec(), ids[..t_len].to_vec(), u)
}

fn with(ids: &[usize], u: usize) -> Vec<usize> {
    let mut v = ids.to_vec();
    v.push(u);
    v
}

fn submodularity() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = f64::NEG_INFINITY;
    let vocab: Vec<String> = (0..30).map(|i| format!("w{i}")).collect();
    for _ in 0..1000 {
        let n = rng.gen_range(2..=12);
        let doc: Vec<String> = (0..n)
            .map(|_| {
                let words: Vec<&str> = (0..rng.gen_range(1..6)).map(|_| vocab[rng.gen_range(0..30)].as_str()).collect();
                format!("{}.", words.join(" "))
            })
            .collect();
        let x = DocumentSet::from_documents("s", &[doc.join(" ")], &Stopwords::empty()).map_err(|e| e.to_string())?;
        let n = x.len();
        if n < 2 {
            continue;
        }
        let omega: Vec<f64> = (0..x.vocabulary.len()).map(|_| rng.gen_range(0.0..1.0)).collect();
        let cov = CoverageScorer::new(&x, omega, false);
        let (s, t, u) = nested(&mut rng, n);
        let f = |ids: &[usize]| cov.score(&summary(ids));
        worst = worst.max((f(&with(&t, u)) - f(&t)) - (f(&with(&s, u)) - f(&s)));
    }
    for _ in 0..1000 {
        let n = rng.gen_range(2..=12);
        let raw: Vec<f64> = (0..n * n).map(|_| rng.gen_range(0.0..1.0)).collect();
        let sigma = SimMatrix::from_fn(n, |i, j| raw[i.min(j) * n + i.max(j)]);
        let pair = PairwiseScorer::new(sigma, rng.gen_range(0.0..8.0), false);
        let (s, t, u) = nested(&mut rng, n);
        let f = |ids: &[usize]| pair.score(&summary(ids));
        worst = worst.max((f(&with(&t, u)) - f(&t)) - (f(&with(&s, u)) - f(&s)));
    }
    let detail = format!("2x1000 draws, worst gain excess {worst:.2e}");
    if worst > 1e-9 {
        return Err(detail);
    }
    within(start.elapsed(), Duration::from_secs(10), detail)
}

fn greedy_approximation() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut ratios = Vec::new();
    for _ in 0..200 {
        let n = rng.gen_range(2..=10);
        let m = rng.gen_range(3..=15);
        let sets: Vec<Vec<usize>> = (0..n)
            .map(|_| (0..rng.gen_range(1..=m / 2 + 1)).map(|_| rng.gen_range(0..m)).collect())
            .collect();
        let weights: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..1.0)).collect();
        let k = rng.gen_range(1..n);
        let cov = CoverageSets::new(sets.clone(), weights.clone());
        let cfg = GreedyConfig {
            budget_bytes: k as u64,
            r: 1.0,
            ..Default::default()
        };
        let got = greedy_maximize(&vec![1; n], &mut cov.state(), &cfg);
        let value = |ids: &[usize]| {
            let mut covered = vec![false; m];
            ids.iter().for_each(|&i| sets[i].iter().for_each(|&v| covered[v] = true));
            (0..m).filter(|&v| covered[v]).map(|v| weights[v]).sum::<f64>()
        };
        let mut opt: f64 = 0.0;
        for mask in 0u32..1 << n {
            if mask.count_ones() as usize <= k {
                opt = opt.max(value(&(0..n).filter(|i| mask & (1 << i) != 0).collect::<Vec<_>>()));
            }
        }
        ratios.push(if opt > 0.0 { value(got.ids()) / opt } else { 1.0 });
    }
    let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let avg = mean(&ratios);
    let detail = format!("200 instances, min ratio {min:.4}, mean {avg:.4}");
    if min < 1.0 - (-1.0f64).exp() || avg < 0.99 {
        return Err(detail);
    }
    within(start.elapsed(), Duration::from_secs(60), detail)
}

fn rouge_oracle() -> Outcome {
    let four_sevenths = rouge1_prf(
        &UnigramCounts::from_words(["a", "b", "x"]),
        &[UnigramCounts::from_words(["a", "b", "c", "d"])],
    )
    .map_err(|e| e.to_string())?
    .f;
    if four_sevenths != 4.0 / 7.0 {
        return Err(format!("4/7 example gave {four_sevenths:.17}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let words = ["a", "b", "c", "d", "e", "f", "g"];
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let draw = |rng: &mut ChaCha8Rng, lo: usize| -> Vec<&str> {
            (0..rng.gen_range(lo..12)).map(|_| words[rng.gen_range(0..words.len())]).collect()
        };
        let cand = draw(&mut rng, 0);
        let refs: Vec<Vec<&str>> = (0..rng.gen_range(1..4)).map(|_| draw(&mut rng, 1)).collect();
        let ours = rouge1_prf(
            &UnigramCounts::from_words(cand.iter().copied()),
            &refs.iter().map(|r| UnigramCounts::from_words(r.iter().copied())).collect::<Vec<_>>(),
        )
        .map_err(|e| e.to_string())?
        .f;
        worst = worst.max((ours - common::brute_rouge1_f(&cand, &refs)).abs());
    }
    check(worst <= 1e-12, format!("4/7 exact, 500 draws, max deviation {worst:.2e}"))
}

fn qp_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut analytic: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.gen_range(1..5);
        let dense: Vec<f64> = (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let loss = rng.gen_range(0.01..1.0);
        let c = rng.gen_range(0.01..10.0);
        let mut ws = WorkingSet::new(n, 4);
        ws.add(constraint(0, loss, FeatureVector::from_dense(&dense))).map_err(|e| e.to_string())?;
        solve_qp(&mut ws, &TrainerConfig::default().with_c(c)).map_err(|e| e.to_string())?;
        let norm: f64 = dense.iter().map(|v| v * v).sum();
        analytic = analytic.max((ws.alpha(0)[0] - (c / n as f64).min(loss / norm)).abs());
    }
    let mut dense_gap: f64 = 0.0;
    for _ in 0..25 {
        let (n, dim) = (rng.gen_range(1..=4), rng.gen_range(2..=5));
        let groups: Vec<Vec<(f64, Vec<f64>)>> = (0..n)
            .map(|_| {
                (0..rng.gen_range(1..=4))
                    .map(|_| (rng.gen_range(0.0..1.0), (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()))
                    .collect()
            })
            .collect();
        let c = [0.1, 1.0, 10.0][rng.gen_range(0..3)];
        let mut ws = WorkingSet::new(n, dim);
        for (i, g) in groups.iter().enumerate() {
            for (l, v) in g {
                ws.add(constraint(i, *l, FeatureVector::from_dense(v))).map_err(|e| e.to_string())?;
            }
        }
        let sol = solve_qp(&mut ws, &TrainerConfig::default().with_c(c)).map_err(|e| e.to_string())?;
        dense_gap = dense_gap.max((sol.dual - common::reference_dual(&groups, c / n as f64)).abs());
    }
    check(
        analytic <= 1e-8 && dense_gap <= 1e-6,
        format!("analytic max error {analytic:.2e}, dense reference max dual error {dense_gap:.2e}"),
    )
}

fn cutting_plane() -> Outcome {
    let start = Instant::now();
    let data = fixture_data(&LossConfig::default());
    let trainer = TrainerConfig::default().with_c(10.0);
    let trained = train(&data, &ModelSpec::new(ModelKind::Pairwise), &trainer).map_err(|e| e.to_string())?;
    let last = trained.log.last().ok_or("empty training log")?;
    let monotone = trained.duals.windows(2).all(|w| w[1] >= w[0] - 1e-12 * (1.0 + w[0].abs()));
    let mut mismatched = 0;
    let mut loss = 0.0;
    for (x, y) in &data {
        let pred = predict(x, &trained.model).map_err(|e| e.to_string())?;
        let target = y.target.as_ref().ok_or("missing target")?;
        if !pred.same_set(target) {
            mismatched += 1;
        }
        loss += submodsum::rouge::loss_delta(y, &pred, x, &LossConfig::default()).map_err(|e| e.to_string())?;
    }
    let detail = format!(
        "{} sets, {} passes, final max violation {:.2e}, {} solves, dual monotone {monotone}, training loss {loss:.2e}, {mismatched} predictions differ from targets",
        data.len(),
        trained.log.len(),
        last.max_violation,
        trained.duals.len(),
    );
    if !(trained.converged && last.max_violation <= trainer.epsilon && monotone && loss == 0.0 && mismatched == 0) {
        return Err(detail);
    }
    within(start.elapsed(), Duration::from_secs(300), detail)
}

fn learning_effect() -> Outcome {
    let exp = expected();
    let data = fixture_data(&LossConfig::default());
    let p = protocol();
    let one = plan(data.len(), 1, exp.seed);
    let split = &one.splits[0];
    let selected = select_c(&data, split, &p).map_err(|e| e.to_string())?;
    let loss = p.eval_loss();
    let learned = mean(
        &evaluate_model(&data, &split.test, &selected.model, &loss)
            .map_err(|e| e.to_string())?
            .iter()
            .map(|s| s.f)
            .collect::<Vec<_>>(),
    );
    let uniform_model = Model::uniform(p.spec.clone()).map_err(|e| e.to_string())?;
    let uniform = mean(
        &evaluate_model(&data, &split.test, &uniform_model, &loss)
            .map_err(|e| e.to_string())?
            .iter()
            .map(|s| s.f)
            .collect::<Vec<_>>(),
    );
    let rows = curve(&data, &plan(data.len(), 10, exp.seed), &p, &[1, 20]).map_err(|e| e.to_string())?;
    let (first, last) = (rows.first().ok_or("no curve")?, rows.last().ok_or("no curve")?);
    check(
        learned - uniform >= exp.learning_margin && last.mean_f >= first.mean_f - 0.01,
        format!(
            "learned {learned:.4} vs uniform {uniform:.4} (margin {:.2} required), curve F({})={:.4} F({})={:.4}",
            exp.learning_margin, first.size, first.mean_f, last.size, last.mean_f
        ),
    )
}

fn bounds_ordering() -> Outcome {
    let exp = expected();
    let data = fixture_data(&LossConfig::default());
    let b = bounds(&data, &plan(data.len(), 10, exp.seed), &protocol()).map_err(|e| e.to_string())?;
    let tol = 1e-12;
    check(
        b.extractive.mean + tol >= b.model_fit.mean && b.model_fit.mean + tol >= b.prediction.mean,
        format!(
            "extractive {:.4} >= model_fit {:.4} >= prediction {:.4}",
            b.extractive.mean, b.model_fit.mean, b.prediction.mean
        ),
    )
}

fn duc04_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/duc04.jsonl")
}

/// `None` when the data file is absent.
fn duc04() -> Option<Outcome> {
    let path = duc04_path();
    if !path.exists() {
        return None;
    }
    Some((|| {
        let greedy = GreedyConfig::default();
        let loss = LossConfig::default();
        let records = load_records(&path).map_err(|e| e.to_string())?;
        let data = prepare(&records, &Stopwords::default(), &greedy, &loss).map_err(|e| e.to_string())?;
        let p = protocol();
        let plan = ExperimentPlan::new(&path, data.len(), SplitSizes::default(), 10, ModelKind::Pairwise, p.c_grid.clone(), &greedy, 0)
            .map_err(|e| e.to_string())?;
        let mut model_f = Vec::new();
        let mut base_f = Vec::new();
        for split in &plan.splits {
            let selected = select_c(&data, split, &p).map_err(|e| e.to_string())?;
            let scores = evaluate_model(&data, &split.test, &selected.model, &loss).map_err(|e| e.to_string())?;
            model_f.push(mean(&scores.iter().map(|s| s.f).collect::<Vec<_>>()));
            let base = evaluate_baseline(&data, &split.test, 4.0, &greedy, &loss).map_err(|e| e.to_string())?;
            base_f.push(mean(&base.iter().map(|s| s.f).collect::<Vec<_>>()));
        }
        let (m, b) = (mean(&model_f), mean(&base_f));
        check(
            (m - 0.4066).abs() <= 0.02 && (b - 0.3935).abs() <= 0.02,
            format!("pairwise {m:.4} (target 0.4066), hand-tuned {b:.4} (target 0.3935), tolerance 0.02"),
        )
    })())
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 7] = [
        ("submodularity", submodularity),
        ("greedy approximation", greedy_approximation),
        ("ROUGE oracle", rouge_oracle),
        ("QP correctness", qp_correctness),
        ("cutting-plane contract", cutting_plane),
        ("learning effect", learning_effect),
        ("bounds ordering", bounds_ordering),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    match duc04() {
        None => println!("SKIP  DUC '04 scores: no data/duc04.jsonl in the workspace root"),
        Some(Ok(detail)) => println!("PASS  DUC '04 scores: {detail}"),
        Some(Err(detail)) => {
            failed += 1;
            println!("FAIL  DUC '04 scores: {detail}");
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
