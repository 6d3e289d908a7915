//! Writes a synthetic dataset with a planted signal.
//!
//! ```text
//! cargo run --example generate_fixture -- tests/fixtures/synthetic.jsonl
//! ```

use submodsum::synth::{generate, sentence_cost, write_jsonl, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "synthetic.jsonl".into());
    // a second argument `anywhere` drops the position cue
    let cfg = SynthConfig {
        lead_keys: std::env::args().nth(2).as_deref() != Some("anywhere"),
        ..Default::default()
    };
    let records = generate(&cfg)?;
    write_jsonl(&records, &path)?;
    println!(
        "{} sets, {} sentences of {} bytes each per set, budget {} bytes -> {path}",
        records.len(),
        cfg.subtopics * (1 + cfg.supports + cfg.distractors),
        sentence_cost(&cfg),
        records[0].budget_bytes.unwrap_or_default(),
    );
    Ok(())
}
