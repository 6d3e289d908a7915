//! Sentence segmentation, tokenization and per-set statistics.

use submodsum::corpus::{segment_sentences, tokenize, DocumentSet, Stopwords};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let doc = "Dr. Smith arrived in Washington on Monday. He met J. Brown at 3 p.m. Talks ended late.";
    let stopwords = Stopwords::default();

    for s in segment_sentences(doc) {
        let toks: Vec<String> = tokenize(&s, &stopwords)
            .iter()
            .map(|t| if t.is_stopword { format!("({})", t.normalized) } else { t.normalized.clone() })
            .collect();
        println!("{s:<45} -> {}", toks.join(" "));
    }

    let x = DocumentSet::from_documents("demo", &[doc, "Washington stayed calm. Smith left on Tuesday."], &stopwords)?;
    println!("\n{} sentences over {} documents, {} word types", x.len(), x.num_docs, x.vocabulary.len());
    for s in &x.sentences {
        println!("  #{} doc {} pos {} cost {}", s.id, s.doc_id, s.position_in_doc, s.cost);
    }
    let id = x.vocabulary.id("washington").expect("word present");
    let stats = x.vocabulary.stats(id);
    println!("'washington': doc_freq {}, capitalized {} of {}", stats.doc_freq, stats.capitalized_count, stats.count);
    Ok(())
}
