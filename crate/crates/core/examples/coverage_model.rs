//! Coverage and split-trade-off models on the same corpus, with their heaviest weights.

use submodsum::corpus::Stopwords;
use submodsum::experiment::{evaluate_model, prepare};
use submodsum::features::FeatureRegistry;
use submodsum::greedy::GreedyConfig;
use submodsum::learner::{train, ModelKind, ModelSpec, TrainerConfig};
use submodsum::rouge::LossConfig;
use submodsum::stats::mean;
use submodsum::synth::{generate, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let records = generate(&SynthConfig { sets: 24, ..Default::default() })?;
    let loss = LossConfig::default();
    let data = prepare(&records, &Stopwords::default(), &GreedyConfig::default(), &loss)?;
    let (train_set, test_set) = data.split_at(16);
    let test_ids: Vec<usize> = (0..test_set.len()).collect();

    for kind in [ModelKind::Coverage, ModelKind::PairwiseSplit] {
        let spec = ModelSpec::new(kind);
        let model = train(train_set, &spec, &TrainerConfig::default().with_c(10.0))?.model;
        let f = mean(&evaluate_model(test_set, &test_ids, &model, &loss)?.iter().map(|s| s.f).collect::<Vec<_>>());
        println!("{}: test F {f:.4}", kind.name());

        let registry = FeatureRegistry::new(&spec.feature_config, kind.space());
        let mut ranked: Vec<(usize, f64)> = model.weights.iter().copied().enumerate().collect();
        ranked.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()));
        for (k, w) in ranked.into_iter().take(5) {
            // the split model stacks a coverage block and a redundancy block
            let block = if k >= registry.dim() { "redundancy " } else { "" };
            println!("  {w:+.4}  {block}{}", registry.name(k % registry.dim()));
        }
    }
    Ok(())
}
