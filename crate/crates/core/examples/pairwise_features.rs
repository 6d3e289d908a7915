//! Feature vectors of sentence pairs and the similarity they induce.

use submodsum::corpus::{DocumentSet, Stopwords};
use submodsum::features::{pairwise_features, FeatureConfig, FeatureRegistry, FeatureSpace, Group, PairwiseTable};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let docs = [
        "The storm hit Florida on Sunday. Thousands lost power across Florida.",
        "Power companies in Florida restored service. The storm moved north.",
    ];
    let x = DocumentSet::from_documents("storm", &docs, &Stopwords::default())?;
    let cfg = FeatureConfig::default();
    let registry = FeatureRegistry::new(&cfg, FeatureSpace::Pairwise);
    println!("pairwise feature space: {} dimensions", registry.dim());

    let phi = pairwise_features(&x, 1, 2, &cfg)?;
    println!("\nphi(1, 2) has {} non-zero entries:", phi.nnz());
    for &(k, v) in phi.entries() {
        println!("  {:<40} {v:.4}", registry.name(k));
    }

    // any weight vector turns the table into a similarity matrix
    let table = PairwiseTable::build(&x, &cfg);
    let w: Vec<f64> = (0..registry.dim())
        .map(|k| if registry.name(k).ends_with("/cos") { 1.0 } else { 0.0 })
        .collect();
    let sigma = table.sigma(&w);
    println!("\nsigma with unit weight on every cosine feature:");
    for i in 0..x.len() {
        let row: Vec<String> = (0..x.len()).map(|j| format!("{:5.2}", sigma.get(i, j))).collect();
        println!("  {}", row.join(" "));
    }

    let basic_only = FeatureConfig::only(&[Group::Basic]);
    println!("\nbasic group alone: {} dimensions", FeatureRegistry::new(&basic_only, FeatureSpace::Pairwise).dim());
    Ok(())
}
