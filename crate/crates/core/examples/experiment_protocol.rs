//! Resampled protocol: C selection on validation sets, bounds, a learning
//! curve and a feature ablation, as the command-line tool runs them.

use submodsum::corpus::Stopwords;
use submodsum::experiment::{
    ablate, ablation_to_tsv, bounds, curve, curve_to_tsv, prepare, select_c, ExperimentPlan, Protocol, Removed,
    SplitSizes,
};
use submodsum::greedy::GreedyConfig;
use submodsum::learner::{ModelKind, ModelSpec, TrainerConfig};
use submodsum::rouge::LossConfig;
use submodsum::synth::{generate, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let greedy = GreedyConfig::default();
    let records = generate(&SynthConfig::default())?;
    let data = prepare(&records, &Stopwords::default(), &greedy, &LossConfig::default())?;
    let c_grid = vec![0.1, 1.0, 10.0];
    let plan = ExperimentPlan::new("synthetic", data.len(), SplitSizes::default(), 3, ModelKind::Pairwise, c_grid.clone(), &greedy, 7)?;
    let protocol = Protocol {
        spec: ModelSpec::new(ModelKind::Pairwise),
        trainer: TrainerConfig::default(),
        c_grid,
        pooled: false,
    };

    let chosen = select_c(&data, &plan.splits[0], &protocol)?;
    println!("resample 0: C = {} (validation F {:.4})\n", chosen.c, chosen.val_f);
    println!("{}", bounds(&data, &plan, &protocol)?.to_tsv());
    println!("{}", curve_to_tsv(&curve(&data, &plan, &protocol, &[1, 5, 20])?));
    print!("{}", ablation_to_tsv(&ablate(&data, &plan, &protocol, &Removed::standard_rows())?));
    Ok(())
}
