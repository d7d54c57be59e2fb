//! Sparse bag-of-concepts (BOC) vectors.
//!
//! A BOC maps a text onto weighted concepts. Weights come from a term/concept
//! association score summed over the terms of the text; here the score is the
//! TF-IDF of the term in the concept's own article, as in Explicit Semantic
//! Analysis.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::corpus::{tokenize_words, AnnotatedDocument, Token};
use crate::error::{Error, Result};

/// Sparse concept vector. Entries are unique, strictly positive, and sorted
/// by descending weight with ties broken by ascending concept id.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseBoc {
    entries: Vec<(String, f64)>,
}

fn by_weight_then_id(a: &(String, f64), b: &(String, f64)) -> Ordering {
    b.1.partial_cmp(&a.1)
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.0.cmp(&b.0))
}

impl SparseBoc {
    /// Validates and canonicalizes the entries.
    pub fn new<I, S>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for (id, w) in entries {
            let id = id.into();
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::Config(format!(
                    "concept {id} has non-positive weight {w}"
                )));
            }
            if id.is_empty() {
                return Err(Error::Config("empty concept id".into()));
            }
            if !seen.insert(id.clone()) {
                return Err(Error::Config(format!("duplicate concept {id}")));
            }
            out.push((id, w));
        }
        out.sort_by(by_weight_then_id);
        Ok(SparseBoc { entries: out })
    }

    pub fn entries(&self) -> &[(String, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|(_, w)| w * w).sum::<f64>().sqrt()
    }

    pub fn weight_sum(&self) -> f64 {
        self.entries.iter().map(|(_, w)| w).sum()
    }

    /// Keeps the `n` highest-weighted entries.
    pub fn truncate(&self, n: usize) -> SparseBoc {
        SparseBoc {
            entries: self.entries[..n.min(self.entries.len())].to_vec(),
        }
    }

    /// Multiplies every weight by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<SparseBoc> {
        SparseBoc::new(self.entries.iter().map(|(c, w)| (c.clone(), w * factor)))
    }

    /// Sums weights of two vectors concept-wise.
    pub fn merged(&self, other: &SparseBoc) -> SparseBoc {
        let mut acc: HashMap<&str, f64> = HashMap::new();
        for (c, w) in self.entries.iter().chain(&other.entries) {
            *acc.entry(c.as_str()).or_insert(0.0) += w;
        }
        let mut entries: Vec<(String, f64)> =
            acc.into_iter().map(|(c, w)| (c.to_owned(), w)).collect();
        entries.sort_by(by_weight_then_id);
        SparseBoc { entries }
    }

    fn sorted_by_id(&self) -> Vec<(&str, f64)> {
        let mut v: Vec<(&str, f64)> = self.entries.iter().map(|(c, w)| (c.as_str(), *w)).collect();
        v.sort_unstable_by(|a, b| a.0.cmp(b.0));
        v
    }
}

/// Keeps the first `min(n, |v|)` entries of `v`.
pub fn truncate(v: &SparseBoc, n: usize) -> SparseBoc {
    v.truncate(n)
}

/// Exact-match cosine between two BOC vectors. The pairwise indicator sum
/// is computed with a merge over id-sorted copies.
pub fn sparse_cosine(u: &SparseBoc, v: &SparseBoc) -> Result<f64> {
    if u.is_empty() || v.is_empty() {
        return Err(Error::EmptyBoc);
    }
    let a = u.sorted_by_id();
    let b = v.sorted_by_id();
    let (mut i, mut j) = (0, 0);
    let mut dot = 0.0;
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(b[j].0) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                dot += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    Ok((dot / (u.norm() * v.norm())).min(1.0))
}

/// Log-scaled TF-IDF: `(1 + ln tf) · ln(N / df)`, zero when `tf == 0`.
pub fn tfidf(tf: u32, df: u32, n_concepts: u32) -> f64 {
    if tf == 0 || df == 0 {
        return 0.0;
    }
    (1.0 + (tf as f64).ln()) * (n_concepts as f64 / df as f64).ln()
}

/// Inverted index from terms to concepts with TF-IDF association scores.
/// Immutable once built.
#[derive(Clone, Debug, Default)]
pub struct ConceptIndex {
    concepts: Vec<String>,
    postings: HashMap<String, Vec<(u32, f64)>>,
    doc_freq: HashMap<String, u32>,
}

impl ConceptIndex {
    /// Builds the index treating each document as the article of the concept
    /// named by its `doc_id`. Only word tokens are indexed.
    pub fn build<'a, I>(documents: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a AnnotatedDocument>,
    {
        let mut concepts = Vec::new();
        let mut seen = HashSet::new();
        let mut term_freqs: Vec<HashMap<&'a str, u32>> = Vec::new();
        for doc in documents {
            if !seen.insert(doc.doc_id.as_str()) {
                return Err(Error::DuplicateDocument(doc.doc_id.clone()));
            }
            let mut tf: HashMap<&str, u32> = HashMap::new();
            for token in &doc.tokens {
                if let Token::Word(w) = token {
                    if !w.is_empty() {
                        *tf.entry(w.as_str()).or_insert(0) += 1;
                    }
                }
            }
            concepts.push(doc.doc_id.clone());
            term_freqs.push(tf);
        }

        let mut doc_freq: HashMap<String, u32> = HashMap::new();
        for tf in &term_freqs {
            for term in tf.keys() {
                *doc_freq.entry((*term).to_owned()).or_insert(0) += 1;
            }
        }

        let n = concepts.len() as u32;
        let mut postings: HashMap<String, Vec<(u32, f64)>> = HashMap::new();
        for (cid, tf) in term_freqs.iter().enumerate() {
            for (term, &count) in tf {
                let score = tfidf(count, doc_freq[*term], n);
                if score > 0.0 {
                    postings
                        .entry((*term).to_owned())
                        .or_default()
                        .push((cid as u32, score));
                }
            }
        }
        Ok(ConceptIndex {
            concepts,
            postings,
            doc_freq,
        })
    }

    pub fn concept_count(&self) -> usize {
        self.concepts.len()
    }

    pub fn doc_freq(&self, term: &str) -> u32 {
        self.doc_freq.get(term).copied().unwrap_or(0)
    }

    /// Association score of `term` with `concept_id`.
    pub fn score(&self, concept_id: &str, term: &str) -> f64 {
        self.postings
            .get(term)
            .and_then(|p| {
                p.iter()
                    .find(|(c, _)| self.concepts[*c as usize] == concept_id)
            })
            .map_or(0.0, |(_, s)| *s)
    }

    /// Concept ids and scores associated with a normalized term.
    pub fn postings(&self, term: &str) -> impl Iterator<Item = (&str, f64)> {
        self.postings
            .get(term)
            .into_iter()
            .flatten()
            .map(|(c, s)| (self.concepts[*c as usize].as_str(), *s))
    }

    /// BOC of a text: per-concept sums of the scores of every term occurrence,
    /// keeping the `top_n` heaviest concepts. May be empty.
    pub fn build_boc(&self, text: &str, top_n: usize) -> SparseBoc {
        let mut weights: HashMap<u32, f64> = HashMap::new();
        for term in tokenize_words(text) {
            if let Some(postings) = self.postings.get(&term) {
                for &(c, s) in postings {
                    *weights.entry(c).or_insert(0.0) += s;
                }
            }
        }
        let mut entries: Vec<(String, f64)> = weights
            .into_iter()
            .filter(|&(_, w)| w > 0.0 && w.is_finite())
            .map(|(c, w)| (self.concepts[c as usize].clone(), w))
            .collect();
        entries.sort_by(by_weight_then_id);
        entries.truncate(top_n);
        SparseBoc { entries }
    }
}

pub fn build_index<'a, I>(documents: I) -> Result<ConceptIndex>
where
    I: IntoIterator<Item = &'a AnnotatedDocument>,
{
    ConceptIndex::build(documents)
}

pub fn build_boc(text: &str, index: &ConceptIndex, top_n: usize) -> Result<SparseBoc> {
    if top_n == 0 {
        return Err(Error::Config("top_n must be at least 1".into()));
    }
    Ok(index.build_boc(text, top_n))
}

/// A named BOC, as stored in BOC files.
pub type BocRecord = (String, SparseBoc);

/// Reads `<record_id><TAB><concept_id>:<weight> ...` lines.
pub fn read_boc_file<R: BufRead>(reader: R, source_name: &str) -> Result<Vec<BocRecord>> {
    let mut records = Vec::new();
    let mut ids = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |msg: String| Error::format(source_name, idx + 1, msg);
        let (id, rest) = line
            .split_once('\t')
            .ok_or_else(|| bad("expected `<record_id><TAB><pairs>`".into()))?;
        if id.is_empty() {
            return Err(bad("empty record id".into()));
        }
        if !ids.insert(id.to_owned()) {
            return Err(bad(format!("duplicate record {id}")));
        }
        let mut pairs = Vec::new();
        for field in rest.split_whitespace() {
            let (concept, weight) = field
                .rsplit_once(':')
                .ok_or_else(|| bad(format!("expected `concept:weight`, found {field:?}")))?;
            let weight: f64 = weight
                .parse()
                .map_err(|_| bad(format!("invalid weight in {field:?}")))?;
            pairs.push((concept.to_owned(), weight));
        }
        let boc = SparseBoc::new(pairs).map_err(|e| bad(e.to_string()))?;
        records.push((id.to_owned(), boc));
    }
    Ok(records)
}

pub fn format_boc_record(id: &str, boc: &SparseBoc) -> String {
    let mut line = String::with_capacity(id.len() + 16 * boc.len());
    line.push_str(id);
    line.push('\t');
    for (i, (c, w)) in boc.entries().iter().enumerate() {
        if i > 0 {
            line.push(' ');
        }
        write!(line, "{c}:{w}").unwrap();
    }
    line
}

pub fn write_boc_file<W: Write>(mut writer: W, records: &[BocRecord]) -> Result<()> {
    for (id, boc) in records {
        writeln!(writer, "{}", format_boc_record(id, boc))?;
    }
    writer.flush()?;
    Ok(())
}
