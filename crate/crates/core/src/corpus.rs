//! Document sets, sentence segmentation and tokenization.
//!
//! A [`DocumentSet`] pools the sentences of every document in one input
//! cluster. Sentence ids are dense (`0..n`) and every sentence carries its
//! byte cost, its position inside its source document and a sparse bag of
//! vocabulary ids used by the feature extractors and ROUGE.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scoring::Summary;

const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords.txt");
const ABBREVIATIONS: &str = include_str!("../data/abbreviations.txt");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    /// Edge-stripped form with original casing.
    pub surface: String,
    pub normalized: String,
    pub is_stopword: bool,
    pub is_capitalized: bool,
    /// Character count of the normalized form.
    pub length: usize,
}

/// A fixed stopword list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stopwords(HashSet<String>);

impl Stopwords {
    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Stopwords(
            words
                .into_iter()
                .map(|w| w.as_ref().trim().to_lowercase())
                .filter(|w| !w.is_empty())
                .collect(),
        )
    }

    /// Reads a UTF-8 file with one word per line.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::from_words(text.lines()))
    }

    pub fn empty() -> Self {
        Stopwords(HashSet::new())
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Default for Stopwords {
    /// The list shipped in `data/stopwords.txt`.
    fn default() -> Self {
        Self::from_words(DEFAULT_STOPWORDS.lines())
    }
}

fn abbreviations() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| {
        ABBREVIATIONS
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect()
    })
}

fn is_closer(c: char) -> bool {
    matches!(c, '"' | '\'' | ')' | ']' | '\u{201d}' | '\u{2019}')
}

fn is_opener(c: char) -> bool {
    matches!(c, '"' | '\'' | '(' | '[' | '\u{201c}' | '\u{2018}')
}

/// Whether `token` can end a sentence given the token that follows it.
fn is_boundary(token: &str, next: &str) -> bool {
    let core = token.trim_end_matches(is_closer);
    let Some(last) = core.chars().last() else {
        return false;
    };
    if !matches!(last, '.' | '!' | '?') {
        return false;
    }
    let starts_upper_or_digit = next
        .trim_start_matches(is_opener)
        .chars()
        .next()
        .is_some_and(|c| c.is_uppercase() || c.is_ascii_digit());
    if !starts_upper_or_digit {
        return false;
    }
    if last == '.' {
        if abbreviations().contains(core) {
            return false;
        }
        // single initials such as "J."
        let mut chars = core.chars();
        if let (Some(c), Some('.'), None) = (chars.next(), chars.next(), chars.next()) {
            if c.is_uppercase() {
                return false;
            }
        }
    }
    true
}

/// Rule-based sentence splitter.
///
/// A boundary is placed after a token ending in `.`, `!` or `?` (optionally
/// followed by closing quotes or brackets) when the next token starts with an
/// uppercase letter or a digit, unless the token is a listed abbreviation or
/// a single-letter initial. Returned sentences are trimmed slices of the
/// input; interior whitespace is preserved.
pub fn segment_sentences(raw_document: &str) -> Vec<String> {
    let mut spans: Vec<(usize, usize)> = Vec::new();
    let mut tokens = Vec::new();
    let mut start = None;
    for (idx, c) in raw_document.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                tokens.push((s, idx));
            }
        } else if start.is_none() {
            start = Some(idx);
        }
    }
    if let Some(s) = start {
        tokens.push((s, raw_document.len()));
    }
    if tokens.is_empty() {
        return Vec::new();
    }

    let mut sentence_start = tokens[0].0;
    for w in tokens.windows(2) {
        let (cur, next) = (w[0], w[1]);
        if is_boundary(&raw_document[cur.0..cur.1], &raw_document[next.0..next.1]) {
            spans.push((sentence_start, cur.1));
            sentence_start = next.0;
        }
    }
    spans.push((sentence_start, tokens[tokens.len() - 1].1));
    spans
        .into_iter()
        .map(|(s, e)| raw_document[s..e].to_string())
        .collect()
}

/// Whitespace tokenizer with edge punctuation stripping and lowercasing.
pub fn tokenize(raw_sentence: &str, stopwords: &Stopwords) -> Vec<Token> {
    raw_sentence
        .split_whitespace()
        .filter_map(|piece| {
            let surface = piece.trim_matches(|c: char| !c.is_alphanumeric());
            if surface.is_empty() {
                return None;
            }
            let normalized = surface.to_lowercase();
            Some(Token {
                surface: surface.to_string(),
                is_stopword: stopwords.contains(&normalized),
                is_capitalized: surface.chars().next().is_some_and(char::is_uppercase),
                length: normalized.chars().count(),
                normalized,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sentence {
    pub id: usize,
    pub doc_id: usize,
    pub position_in_doc: usize,
    pub text: String,
    pub tokens: Vec<Token>,
    /// Byte length of `text`.
    pub cost: u64,
    /// `(word id, count)` pairs sorted by word id.
    pub terms: Vec<(usize, u32)>,
}

/// Per-word statistics gathered over one document set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordStats {
    pub doc_freq: usize,
    pub sent_freq: usize,
    pub count: usize,
    pub capitalized_count: usize,
    /// Earliest `position_in_doc` of any sentence containing the word.
    pub first_position: usize,
    /// Largest number of occurrences inside a single sentence.
    pub max_sentence_count: u32,
    pub is_stopword: bool,
    pub length: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Vocabulary {
    words: Vec<String>,
    stats: Vec<WordStats>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn id(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn word(&self, id: usize) -> &str {
        &self.words[id]
    }

    pub fn stats(&self, id: usize) -> &WordStats {
        &self.stats[id]
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &str, &WordStats)> {
        self.words
            .iter()
            .zip(&self.stats)
            .enumerate()
            .map(|(i, (w, s))| (i, w.as_str(), s))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DocumentSet {
    pub set_id: String,
    pub sentences: Vec<Sentence>,
    pub num_docs: usize,
    pub vocabulary: Vocabulary,
    /// Budget carried by the dataset record, if any.
    pub budget_bytes: Option<u64>,
}

impl DocumentSet {
    /// Segments and tokenizes `documents`. Sentences without any token are dropped.
    pub fn from_documents<S: AsRef<str>>(
        set_id: impl Into<String>,
        documents: &[S],
        stopwords: &Stopwords,
    ) -> Result<Self> {
        let set_id = set_id.into();
        let mut raw = Vec::new();
        for (doc_id, doc) in documents.iter().enumerate() {
            let mut position = 0;
            for text in segment_sentences(doc.as_ref()) {
                let tokens = tokenize(&text, stopwords);
                if tokens.is_empty() {
                    continue;
                }
                raw.push((doc_id, position, text, tokens));
                position += 1;
            }
        }
        if raw.is_empty() {
            return Err(Error::EmptyDocumentSet(set_id));
        }

        let mut words: BTreeMap<&str, ()> = BTreeMap::new();
        for (_, _, _, tokens) in &raw {
            for t in tokens {
                words.insert(t.normalized.as_str(), ());
            }
        }
        let words: Vec<String> = words.into_keys().map(str::to_string).collect();
        let index: HashMap<String, usize> = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        let mut stats: Vec<WordStats> = words
            .iter()
            .map(|w| WordStats {
                doc_freq: 0,
                sent_freq: 0,
                count: 0,
                capitalized_count: 0,
                first_position: usize::MAX,
                max_sentence_count: 0,
                is_stopword: stopwords.contains(w),
                length: w.chars().count(),
            })
            .collect();
        let mut last_doc_seen = vec![usize::MAX; words.len()];

        let mut sentences = Vec::with_capacity(raw.len());
        for (id, (doc_id, position, text, tokens)) in raw.into_iter().enumerate() {
            let mut counts: BTreeMap<usize, u32> = BTreeMap::new();
            for t in &tokens {
                let w = index[&t.normalized];
                *counts.entry(w).or_default() += 1;
                stats[w].count += 1;
                if t.is_capitalized {
                    stats[w].capitalized_count += 1;
                }
            }
            for (&w, &c) in &counts {
                let s = &mut stats[w];
                s.sent_freq += 1;
                s.first_position = s.first_position.min(position);
                s.max_sentence_count = s.max_sentence_count.max(c);
                if last_doc_seen[w] != doc_id {
                    last_doc_seen[w] = doc_id;
                    s.doc_freq += 1;
                }
            }
            sentences.push(Sentence {
                id,
                doc_id,
                position_in_doc: position,
                cost: text.len() as u64,
                text,
                tokens,
                terms: counts.into_iter().collect(),
            });
        }

        Ok(DocumentSet {
            set_id,
            sentences,
            num_docs: documents.len(),
            vocabulary: Vocabulary {
                words,
                stats,
                index,
            },
            budget_bytes: None,
        })
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn costs(&self) -> Vec<u64> {
        self.sentences.iter().map(|s| s.cost).collect()
    }

    pub fn check_id(&self, id: usize) -> Result<()> {
        if id < self.sentences.len() {
            Ok(())
        } else {
            Err(Error::InvalidSentence {
                id,
                len: self.sentences.len(),
            })
        }
    }

    /// Builds a summary from sentence ids in the given order.
    pub fn summary(&self, ids: &[usize]) -> Result<Summary> {
        let mut y = Summary::default();
        for &id in ids {
            self.check_id(id)?;
            if y.contains(id) {
                return Err(Error::AlreadySelected(id));
            }
            y.push(id, self.sentences[id].cost);
        }
        Ok(y)
    }

    /// Inverse document frequency over the documents of this set.
    pub fn idf(&self, word_id: usize) -> f64 {
        let df = self.vocabulary.stats(word_id).doc_freq as f64;
        ((self.num_docs as f64 + 1.0) / (df + 1.0)).ln() + 1.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSet {
    pub set_id: String,
    pub references: Vec<Vec<Token>>,
    pub target: Option<Summary>,
}

impl ReferenceSet {
    pub fn from_texts<S: AsRef<str>>(
        set_id: impl Into<String>,
        texts: &[S],
        stopwords: &Stopwords,
    ) -> Result<Self> {
        let set_id = set_id.into();
        if texts.is_empty() {
            return Err(Error::NoReferences(set_id));
        }
        Ok(ReferenceSet {
            set_id,
            references: texts
                .iter()
                .map(|t| tokenize(t.as_ref(), stopwords))
                .collect(),
            target: None,
        })
    }
}

/// One line of the dataset file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub set_id: String,
    pub documents: Vec<String>,
    pub references: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget_bytes: Option<u64>,
}

impl DatasetRecord {
    pub fn build(&self, stopwords: &Stopwords) -> Result<(DocumentSet, ReferenceSet)> {
        if self.references.is_empty() {
            return Err(Error::NoReferences(self.set_id.clone()));
        }
        let mut docs = DocumentSet::from_documents(&self.set_id, &self.documents, stopwords)?;
        docs.budget_bytes = self.budget_bytes;
        let refs = ReferenceSet::from_texts(&self.set_id, &self.references, stopwords)?;
        Ok((docs, refs))
    }
}

/// Parses JSON-lines records. Blank lines are skipped; line numbers are 1-based.
pub fn parse_records(text: &str) -> Result<Vec<DatasetRecord>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(line).map_err(|source| Error::MalformedLine { line: i + 1, source })?);
    }
    Ok(out)
}

pub fn load_records(path: impl AsRef<Path>) -> Result<Vec<DatasetRecord>> {
    let path = path.as_ref();
    parse_records(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}

/// Parses and builds JSON-lines dataset text.
pub fn parse_dataset(text: &str, stopwords: &Stopwords) -> Result<Vec<(DocumentSet, ReferenceSet)>> {
    parse_records(text)?.iter().map(|r| r.build(stopwords)).collect()
}

pub fn load_dataset(
    path: impl AsRef<Path>,
    stopwords: &Stopwords,
) -> Result<Vec<(DocumentSet, ReferenceSet)>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_dataset(&text, stopwords)
}
