//! Trains the pairwise model on a generated corpus and compares it to uniform weights.
//!
//! The training log shows the cutting-plane passes: constraints added, the
//! dual objective after each pass, and the largest remaining violation.

use submodsum::corpus::Stopwords;
use submodsum::experiment::{evaluate_model, prepare};
use submodsum::greedy::GreedyConfig;
use submodsum::learner::{train, Model, ModelKind, ModelSpec, TrainerConfig};
use submodsum::rouge::LossConfig;
use submodsum::stats::mean;
use submodsum::synth::{generate, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let records = generate(&SynthConfig { sets: 30, ..Default::default() })?;
    let loss = LossConfig::default();
    let data = prepare(&records, &Stopwords::default(), &GreedyConfig::default(), &loss)?;
    let (train_set, test_set) = data.split_at(20);

    let spec = ModelSpec::new(ModelKind::Pairwise);
    let trained = train(train_set, &spec, &TrainerConfig::default().with_c(10.0))?;
    println!("pass  added  total  dual        max_violation  train_F");
    for l in &trained.log {
        println!(
            "{:>4}  {:>5}  {:>5}  {:<10.6}  {:<13.2e}  {:.4}",
            l.iteration, l.constraints_added, l.constraints_total, l.dual_objective, l.max_violation, l.train_rouge1f
        );
    }

    let test_ids: Vec<usize> = (0..test_set.len()).collect();
    let f = |m: &Model| -> Result<f64, submodsum::error::Error> {
        Ok(mean(&evaluate_model(test_set, &test_ids, m, &loss)?.iter().map(|s| s.f).collect::<Vec<_>>()))
    };
    println!("\ntest ROUGE-1 F: learned {:.4}, uniform {:.4}", f(&trained.model)?, f(&Model::uniform(spec)?)?);

    let path = std::env::temp_dir().join("pairwise_model.json");
    trained.model.save(&path)?;
    println!("model written to {}", path.display());
    Ok(())
}
