//! ROUGE-1 scoring, the training losses and the greedy target summary.

use submodsum::corpus::{DocumentSet, ReferenceSet, Stopwords};
use submodsum::greedy::GreedyConfig;
use submodsum::rouge::{evaluate_summary, loss_delta, loss_delta_r, make_target, rouge1_prf, LossConfig, UnigramCounts};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = rouge1_prf(
        &UnigramCounts::from_words(["a", "b", "x"]),
        &[UnigramCounts::from_words(["a", "b", "c", "d"])],
    )?;
    println!("P {:.4}  R {:.4}  F {:.4} (= 4/7)", p.precision, p.recall, p.f);

    let sw = Stopwords::default();
    let x = DocumentSet::from_documents(
        "quake",
        &["A strong earthquake struck Chile. Markets were calm. Rescue teams reached the coast. Schools reopened."],
        &sw,
    )?;
    let mut refs = ReferenceSet::from_texts(
        "quake",
        &["An earthquake struck Chile and rescue teams reached the coast.", "Rescue teams reached coastal towns after the Chile earthquake."],
        &sw,
    )?;
    let loss = LossConfig::default();
    let target = make_target(&x, &mut refs, &GreedyConfig::default().with_budget(80), &loss)?;
    println!("\ntarget {:?}: F {:.4}", target.ids(), evaluate_summary(&refs, &target, &x, &loss)?.f);

    let other = x.summary(&[1, 3])?;
    println!(
        "summary {:?}: F {:.4}, 1-F {:.4}, loss against target {:.4}",
        other.ids(),
        evaluate_summary(&refs, &other, &x, &loss)?.f,
        loss_delta_r(&refs, &other, &x, &loss)?,
        loss_delta(&refs, &other, &x, &loss)?,
    );
    Ok(())
}
