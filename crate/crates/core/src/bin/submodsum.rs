use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use submodsum::corpus::{load_records, DatasetRecord, Stopwords};
use submodsum::experiment::{
    ablate, ablation_to_tsv, baseline_summary, bounds, curve, curve_to_tsv, evaluate_predictions, parse_predictions,
    prepare, select_c, write_report, Example, ExperimentPlan, Prediction, Protocol, Removed, Split, SplitSizes,
    DEFAULT_CURVE_SIZES, DEFAULT_C_GRID,
};
use submodsum::features::{FeatureConfig, Group};
use submodsum::greedy::GreedyConfig;
use submodsum::learner::{predict, train, write_atomic, Model, ModelKind, ModelSpec, TrainerConfig, DEFAULT_LAMBDA};
use submodsum::rouge::{Aggregation, LossConfig};
use submodsum::stats::sign_test;

type CliResult<T> = Result<T, Box<dyn std::error::Error>>;

#[derive(Parser)]
#[command(name = "submodsum", version, about = "Learned submodular extractive summarization")]
struct Cli {
    /// Print progress messages.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build targets, train a model and write it with its training log.
    Train(TrainArgs),
    /// Summarize every set of a dataset with a model or the hand-tuned baseline.
    Summarize(SummarizeArgs),
    /// ROUGE-1 of stored predictions against the dataset references.
    Evaluate(EvaluateArgs),
    /// Human, extractive, model-fit and prediction rows.
    Bounds(ExperimentArgs),
    /// Test F as a function of the number of training sets.
    Curve(CurveArgs),
    /// Test F with feature groups removed.
    Ablate(AblateArgs),
}

#[derive(Args, Clone)]
struct Common {
    /// JSON-lines dataset.
    #[arg(long)]
    dataset: PathBuf,
    /// Budget in bytes; overrides per-set budgets in the dataset.
    #[arg(long)]
    budget: Option<u64>,
    /// Cost exponent of the greedy selection ratio.
    #[arg(long, default_value_t = 0.3)]
    r: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path. Reports are written as PATH.tsv and PATH.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn greedy(&self) -> GreedyConfig {
        GreedyConfig {
            budget_bytes: self.budget.unwrap_or(GreedyConfig::default().budget_bytes),
            r: self.r,
            ..Default::default()
        }
    }

    fn records(&self) -> CliResult<Vec<DatasetRecord>> {
        let mut records = load_records(&self.dataset)?;
        if self.budget.is_some() {
            for r in &mut records {
                r.budget_bytes = None;
            }
        }
        Ok(records)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum LossMode {
    MeanF,
    MeanLoss,
}

#[derive(Args, Clone)]
struct ModelArgs {
    #[arg(long, default_value = "pairwise", value_parser = parse_kind)]
    model: ModelKind,
    /// Redundancy weight of the pairwise model.
    #[arg(long)]
    lambda: Option<f64>,
    /// One C value, a comma-separated list, or `grid`.
    #[arg(long = "C", default_value = "grid", value_parser = parse_c)]
    c: CGrid,
    #[arg(long, default_value_t = 1e-3)]
    epsilon: f64,
    #[arg(long, default_value_t = 100)]
    max_iters: usize,
    /// Solve the QP once per pass instead of after every new constraint.
    #[arg(long)]
    batch: bool,
    /// Build targets from the first reference only.
    #[arg(long)]
    single_reference: bool,
    #[arg(long, value_enum, default_value = "mean-f")]
    loss: LossMode,
    /// Feature group to leave out; repeatable.
    #[arg(long = "without", value_parser = parse_group)]
    without: Vec<Group>,
}

impl ModelArgs {
    fn protocol(&self, greedy: &GreedyConfig, pooled: bool) -> CliResult<Protocol> {
        let mut features = FeatureConfig::default();
        for g in &self.without {
            features = features.without(*g);
        }
        let loss = LossConfig {
            aggregation: match self.loss {
                LossMode::MeanF => Aggregation::MeanF,
                LossMode::MeanLoss => Aggregation::MeanLoss,
            },
            single_reference: self.single_reference,
            ..Default::default()
        };
        let mut spec = ModelSpec::new(self.model)
            .with_features(features)
            .with_greedy(greedy.clone())
            .with_loss(loss);
        if let Some(l) = self.lambda {
            if self.model != ModelKind::Pairwise {
                return Err("--lambda applies to --model pairwise only".into());
            }
            spec = spec.with_lambda(l);
        }
        spec.validate()?;
        let trainer = TrainerConfig {
            epsilon: self.epsilon,
            max_outer_iters: self.max_iters,
            batch: self.batch,
            ..Default::default()
        };
        Ok(Protocol {
            spec,
            trainer,
            c_grid: self.c.0.clone(),
            pooled,
        })
    }
}

fn parse_kind(s: &str) -> Result<ModelKind, String> {
    s.parse()
}

fn parse_group(s: &str) -> Result<Group, String> {
    s.parse().map_err(|e: submodsum::error::Error| e.to_string())
}

#[derive(Clone)]
struct CGrid(Vec<f64>);

fn parse_c(s: &str) -> Result<CGrid, String> {
    if s == "grid" {
        return Ok(CGrid(DEFAULT_C_GRID.to_vec()));
    }
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .ok()
                .filter(|c| *c > 0.0 && c.is_finite())
                .ok_or_else(|| format!("invalid C value {v:?}"))
        })
        .collect::<Result<_, _>>()
        .map(CGrid)
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    model: ModelArgs,
    /// Sets held out to choose C when several values are given.
    #[arg(long, default_value_t = 5)]
    val: usize,
}

#[derive(Args)]
struct SummarizeArgs {
    #[command(flatten)]
    common: Common,
    /// Trained model file.
    #[arg(long, conflicts_with = "baseline", required_unless_present = "baseline")]
    model_file: Option<PathBuf>,
    /// Fixed scorer to run instead of a model.
    #[arg(long, value_enum)]
    baseline: Option<Baseline>,
    /// Redundancy weight of the baseline.
    #[arg(long, default_value_t = DEFAULT_LAMBDA)]
    lambda: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Baseline {
    HandTuned,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    common: Common,
    /// Predictions written by `summarize --out`.
    #[arg(long)]
    predictions: PathBuf,
    /// Second predictions file for a paired sign test.
    #[arg(long)]
    compare: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 10)]
    resamples: usize,
    #[arg(long, default_value_t = 20)]
    train: usize,
    #[arg(long, default_value_t = 5)]
    val: usize,
    #[arg(long, default_value_t = 5)]
    test: usize,
    /// Treat all test sets of all resamples as one sample.
    #[arg(long)]
    pooled: bool,
}

#[derive(Args)]
struct CurveArgs {
    #[command(flatten)]
    exp: ExperimentArgs,
    /// Training-set sizes.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_CURVE_SIZES.to_vec())]
    sizes: Vec<usize>,
}

#[derive(Args)]
struct AblateArgs {
    #[command(flatten)]
    exp: ExperimentArgs,
    /// Groups to remove, one row each; defaults to the standard rows.
    #[arg(long, value_delimiter = ',')]
    groups: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .filter_level(if cli.verbose {
            log::LevelFilter::Info
        } else {
            log::LevelFilter::Warn
        })
        .format_timestamp(None)
        .init();
    let result = match cli.command {
        Command::Train(a) => cmd_train(a),
        Command::Summarize(a) => cmd_summarize(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Bounds(a) => cmd_bounds(a),
        Command::Curve(a) => cmd_curve(a),
        Command::Ablate(a) => cmd_ablate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn cmd_train(a: TrainArgs) -> CliResult<()> {
    let greedy = a.common.greedy();
    let protocol = a.model.protocol(&greedy, false)?;
    let out = a.common.out.clone().ok_or("train needs --out")?;
    let data = prepare(&a.common.records()?, &Stopwords::default(), &greedy, &protocol.spec.loss_config)?;

    let (model, log) = if protocol.c_grid.len() == 1 {
        let trained = train(&data, &protocol.spec, &protocol.trainer.clone().with_c(protocol.c_grid[0]))?;
        if !trained.converged {
            log::warn!("stopped after {} passes without converging", trained.log.len());
        }
        (trained.model, trained.log)
    } else {
        if a.val == 0 || a.val >= data.len() {
            return Err(format!("--val must be between 1 and {} to choose C", data.len() - 1).into());
        }
        let mut ids: Vec<usize> = (0..data.len()).collect();
        ids.shuffle(&mut ChaCha8Rng::seed_from_u64(a.common.seed));
        let split = Split {
            val: ids[..a.val].to_vec(),
            train: ids[a.val..].to_vec(),
            test: Vec::new(),
        };
        let selected = select_c(&data, &split, &protocol)?;
        log::info!("selected C = {} (validation F {:.5})", selected.c, selected.val_f);
        let train_data: Vec<Example> = split.train.iter().map(|&i| data[i].clone()).collect();
        let trained = train(&train_data, &protocol.spec, &protocol.trainer.clone().with_c(selected.c))?;
        (trained.model, trained.log)
    };
    model.save(&out)?;
    let log_path = with_suffix(&out, "log.jsonl");
    let mut text = String::new();
    for entry in &log {
        text.push_str(&serde_json::to_string(entry)?);
        text.push('\n');
    }
    write_atomic(&log_path, text.as_bytes())?;
    eprintln!("wrote {} and {}", out.display(), log_path.display());
    Ok(())
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}

fn cmd_summarize(a: SummarizeArgs) -> CliResult<()> {
    let stopwords = Stopwords::default();
    let model = match &a.model_file {
        Some(p) => {
            let mut m = Model::load(p)?;
            m.spec.greedy_config.r = a.common.r;
            if let Some(b) = a.common.budget {
                m.spec.greedy_config.budget_bytes = b;
            }
            Some(m)
        }
        None => None,
    };
    let mut stdout = String::new();
    let mut predictions = String::new();
    for rec in a.common.records()? {
        let (x, _) = rec.build(&stopwords)?;
        let y = match &model {
            Some(m) => predict(&x, m)?,
            None => baseline_summary(&x, a.lambda, &a.common.greedy()),
        };
        stdout.push_str(&format!("# {} ({} bytes)\n", x.set_id, y.total_cost()));
        for &id in y.ids() {
            stdout.push_str(&x.sentences[id].text);
            stdout.push('\n');
        }
        stdout.push('\n');
        predictions.push_str(&serde_json::to_string(&Prediction::new(&x, &y))?);
        predictions.push('\n');
    }
    print!("{stdout}");
    if let Some(out) = &a.common.out {
        write_report(out, &predictions)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct SignTestReport {
    compare: PathBuf,
    wins: usize,
    losses: usize,
    ties: usize,
    p_value: f64,
}

fn cmd_evaluate(a: EvaluateArgs) -> CliResult<()> {
    // references only: targets are not needed for scoring
    let data: Vec<Example> = a
        .common
        .records()?
        .iter()
        .map(|r| r.build(&Stopwords::default()))
        .collect::<Result<_, _>>()?;
    let loss = LossConfig::default();
    let read = |p: &Path| -> CliResult<Vec<Prediction>> {
        let text = std::fs::read_to_string(p).map_err(|e| format!("failed to read {}: {e}", p.display()))?;
        Ok(parse_predictions(&text)?)
    };
    let report = evaluate_predictions(&data, &read(&a.predictions)?, &loss)?;
    let mut tsv = report.to_tsv();
    let mut json = serde_json::to_value(&report)?;
    if let Some(other) = &a.compare {
        let theirs = evaluate_predictions(&data, &read(other)?, &loss)?;
        let f = |r: &submodsum::experiment::EvaluationReport, id: &str| {
            r.sets.iter().find(|s| s.set_id == id).map(|s| s.f)
        };
        let mut ours_f = Vec::new();
        let mut theirs_f = Vec::new();
        for s in &report.sets {
            let t = f(&theirs, &s.set_id).ok_or_else(|| format!("set {:?} missing from {}", s.set_id, other.display()))?;
            ours_f.push(s.f);
            theirs_f.push(t);
        }
        let t = sign_test(&ours_f, &theirs_f);
        tsv.push_str(&format!(
            "sign_test\twins={}\tlosses={}\tties={}\tp={:.5}\n",
            t.wins, t.losses, t.ties, t.p_value
        ));
        json["sign_test"] = serde_json::to_value(SignTestReport {
            compare: other.clone(),
            wins: t.wins,
            losses: t.losses,
            ties: t.ties,
            p_value: t.p_value,
        })?;
    }
    emit(&a.common, &tsv, &json)
}

fn emit(common: &Common, tsv: &str, json: &serde_json::Value) -> CliResult<()> {
    print!("{tsv}");
    if let Some(out) = &common.out {
        write_report(&with_suffix(out, "tsv"), tsv)?;
        write_report(&with_suffix(out, "json"), &(serde_json::to_string_pretty(json)? + "\n"))?;
    }
    Ok(())
}

struct Setup {
    data: Vec<Example>,
    plan: ExperimentPlan,
    protocol: Protocol,
}

fn setup(a: &ExperimentArgs) -> CliResult<Setup> {
    let greedy = a.common.greedy();
    let protocol = a.model.protocol(&greedy, a.pooled)?;
    let data = prepare(&a.common.records()?, &Stopwords::default(), &greedy, &protocol.spec.loss_config)?;
    let plan = ExperimentPlan::new(
        &a.common.dataset,
        data.len(),
        SplitSizes {
            train: a.train,
            val: a.val,
            test: a.test,
        },
        a.resamples,
        a.model.model,
        protocol.c_grid.clone(),
        &greedy,
        a.common.seed,
    )?;
    Ok(Setup { data, plan, protocol })
}

fn cmd_bounds(a: ExperimentArgs) -> CliResult<()> {
    let s = setup(&a)?;
    let report = bounds(&s.data, &s.plan, &s.protocol)?;
    let json = serde_json::json!({ "plan": s.plan, "pooled": a.pooled, "bounds": report });
    emit(&a.common, &report.to_tsv(), &json)
}

fn cmd_curve(a: CurveArgs) -> CliResult<()> {
    let s = setup(&a.exp)?;
    let rows = curve(&s.data, &s.plan, &s.protocol, &a.sizes)?;
    let json = serde_json::json!({ "plan": s.plan, "pooled": a.exp.pooled, "curve": rows });
    emit(&a.exp.common, &curve_to_tsv(&rows), &json)
}

fn cmd_ablate(a: AblateArgs) -> CliResult<()> {
    if a.exp.model.model != ModelKind::Pairwise {
        return Err("ablate runs on --model pairwise".into());
    }
    let rows = if a.groups.is_empty() {
        Removed::standard_rows()
    } else {
        Removed::rows_for(&a.groups)?
    };
    let s = setup(&a.exp)?;
    let table = ablate(&s.data, &s.plan, &s.protocol, &rows)?;
    let json = serde_json::json!({ "plan": s.plan, "pooled": a.exp.pooled, "ablation": table });
    emit(&a.exp.common, &ablation_to_tsv(&table), &json)
}
