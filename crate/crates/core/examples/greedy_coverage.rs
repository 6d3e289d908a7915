//! Budgeted greedy on a word-coverage objective, checked against exhaustive search.

use submodsum::corpus::{DocumentSet, Stopwords};
use submodsum::greedy::{exhaustive_maximize, greedy_maximize, GreedyConfig};
use submodsum::scoring::{CoverageScorer, PairwiseScorer};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let doc = "Rebels seized the airport. The airport closed to traffic. \
               Rebels also took the radio station. Officials urged calm. \
               The radio station went silent. Traffic resumed later.";
    let x = DocumentSet::from_documents("coup", &[doc], &Stopwords::default())?;
    let costs = x.costs();
    let cfg = GreedyConfig::default().with_budget(90);

    // every non-stopword counts once, weighted by idf
    let omega: Vec<f64> = x
        .vocabulary
        .iter()
        .map(|(id, _, s)| if s.is_stopword { 0.0 } else { x.idf(id) })
        .collect();
    let coverage = CoverageScorer::new(&x, omega, true);
    let y = greedy_maximize(&costs, &mut coverage.state(), &cfg);
    let (best, opt) = exhaustive_maximize(&costs, |s| coverage.score(s), &cfg)?;
    println!("coverage greedy picks {:?} ({} bytes), score {:.3}", y.ids(), y.total_cost(), coverage.score(&y));
    println!("exhaustive optimum   {:?}, score {opt:.3}", best.sorted_ids());

    let pairwise = PairwiseScorer::tfidf_baseline(&x, 4.0);
    let y = greedy_maximize(&costs, &mut pairwise.state(), &cfg);
    println!("tfidf pairwise picks {:?}, score {:.3}", y.ids(), pairwise.score(&y));
    for &i in y.ids() {
        println!("  {}", x.sentences[i].text);
    }
    Ok(())
}
