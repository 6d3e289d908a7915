//! Synthetic document sets with a planted, learnable signal.
//!
//! Each set has one document per subtopic. A document opens with a *key*
//! sentence naming all of the subtopic's capitalized entities, followed in
//! random order by *supporting* sentences (two entities each) and
//! *distractor* sentences drawn from a small shared pool of lowercase words.
//! References paraphrase the key sentences, so the best summary is the set of
//! leads. Plain word overlap prefers the dense distractor cluster, while
//! capitalization and position point to the keys, which is what a trained
//! model has to discover.
//!
//! Every generated word has the same length, so all sentences cost the same
//! number of bytes and each record's budget fits exactly one sentence per
//! subtopic.

use std::collections::BTreeSet;
use std::io::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::DatasetRecord;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub sets: usize,
    pub subtopics: usize,
    pub entities: usize,
    pub supports: usize,
    pub distractors: usize,
    pub references: usize,
    /// Words per sentence.
    pub sentence_words: usize,
    /// Key words each reference drops, and novel words it adds, per subtopic.
    pub reference_noise: usize,
    /// Put each key sentence first in its document; otherwise anywhere.
    pub lead_keys: bool,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            sets: 40,
            subtopics: 3,
            entities: 4,
            supports: 3,
            distractors: 4,
            references: 4,
            sentence_words: 8,
            reference_noise: 2,
            lead_keys: true,
            seed: 2010,
        }
    }
}

const WORD_LEN: usize = 6;
const CONSONANTS: &[u8] = b"bcdfghklmnprstvz";
const VOWELS: &[u8] = b"aeiou";

struct Words<'a> {
    rng: &'a mut ChaCha8Rng,
    used: BTreeSet<String>,
}

impl Words<'_> {
    /// Fresh consonant-vowel pseudo-word, unique within the set.
    fn fresh(&mut self) -> String {
        loop {
            let w: String = (0..WORD_LEN)
                .map(|i| {
                    let pool = if i % 2 == 0 { CONSONANTS } else { VOWELS };
                    pool[self.rng.gen_range(0..pool.len())] as char
                })
                .collect();
            if self.used.insert(w.clone()) {
                return w;
            }
        }
    }

    fn many(&mut self, n: usize) -> Vec<String> {
        (0..n).map(|_| self.fresh()).collect()
    }
}

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

fn sentence(words: &[String]) -> String {
    let mut text = words.join(" ");
    text.push('.');
    capitalize(&text)
}

/// Bytes of one generated sentence.
pub fn sentence_cost(cfg: &SynthConfig) -> u64 {
    (cfg.sentence_words * (WORD_LEN + 1)) as u64
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidPlan(m.to_string()));
        if self.sets == 0 || self.subtopics == 0 || self.references == 0 {
            return bad("sets, subtopics and references must be positive");
        }
        if self.entities < 2 || self.entities >= self.sentence_words {
            return bad("need at least 2 entities and fewer than sentence_words");
        }
        if self.reference_noise >= self.sentence_words {
            return bad("reference_noise must be below sentence_words");
        }
        Ok(())
    }
}

/// Generates `cfg.sets` dataset records; identical seeds give identical data.
pub fn generate(cfg: &SynthConfig) -> Result<Vec<DatasetRecord>> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.sentence_words;
    let topic_words = n - cfg.entities;
    let mut records = Vec::with_capacity(cfg.sets);
    for s in 0..cfg.sets {
        let mut set_rng = ChaCha8Rng::seed_from_u64(rng.gen());
        let mut words = Words {
            rng: &mut set_rng,
            used: BTreeSet::new(),
        };
        let pool = words.many(n + 2);
        let topics: Vec<(Vec<String>, Vec<String>)> = (0..cfg.subtopics)
            .map(|_| (words.many(cfg.entities), words.many(topic_words)))
            .collect();
        let novel: Vec<Vec<String>> = (0..cfg.references * cfg.subtopics)
            .map(|_| words.many(cfg.reference_noise))
            .collect();
        let rng = words.rng;

        let mut documents = Vec::new();
        let mut keys = Vec::new();
        for (entities, topic) in &topics {
            let caps: Vec<String> = entities.iter().map(|e| capitalize(e)).collect();
            let mut key: Vec<String> = caps.iter().chain(topic).cloned().collect();
            key[1..].shuffle(rng);
            keys.push(key.clone());

            let mut body = Vec::new();
            for _ in 0..cfg.supports {
                let mut w: Vec<String> = caps.choose_multiple(rng, 2).cloned().collect();
                w.extend(topic.choose_multiple(rng, 2).cloned());
                w.extend(pool.choose_multiple(rng, n - 4).cloned());
                w.shuffle(rng);
                body.push(sentence(&w));
            }
            for _ in 0..cfg.distractors {
                let w: Vec<String> = pool.choose_multiple(rng, n).cloned().collect();
                body.push(sentence(&w));
            }
            body.shuffle(rng);
            let at = if cfg.lead_keys { 0 } else { rng.gen_range(0..=body.len()) };
            body.insert(at, sentence(&key));
            documents.push(body.join(" "));
        }

        let references = (0..cfg.references)
            .map(|r| {
                let mut out = Vec::new();
                for (t, key) in keys.iter().enumerate() {
                    let mut kept: Vec<String> = key.iter().map(|w| w.to_lowercase()).collect();
                    for _ in 0..cfg.reference_noise {
                        kept.remove(rng.gen_range(0..kept.len()));
                    }
                    kept.extend(novel[r * cfg.subtopics + t].iter().cloned());
                    kept.shuffle(rng);
                    out.push(kept.join(" "));
                }
                out.join(" ")
            })
            .collect();

        records.push(DatasetRecord {
            set_id: format!("synth{s:03}"),
            documents,
            references,
            budget_bytes: Some(cfg.subtopics as u64 * sentence_cost(cfg) + sentence_cost(cfg) / 2),
        });
    }
    Ok(records)
}

/// One JSON object per line.
pub fn to_jsonl(records: &[DatasetRecord]) -> Result<String> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn write_jsonl(records: &[DatasetRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(to_jsonl(records)?.as_bytes())
        .map_err(|e| Error::io(path, e))
}
