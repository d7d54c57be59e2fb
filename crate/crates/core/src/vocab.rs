//! Word and concept lexicon with the negative-sampling noise distribution.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::corpus::Token;
use crate::error::{Error, Result};

/// Prefix separating concept keys from word keys in vocabulary and
/// embedding files.
pub const CONCEPT_PREFIX: &str = "c:";

/// Default exponent applied to unigram counts for the noise distribution.
pub const NOISE_EXPONENT: f64 = 0.75;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TokenKind {
    Word,
    Concept,
}

impl TokenKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TokenKind::Word => "word",
            TokenKind::Concept => "concept",
        }
    }
}

/// Key under which a token is stored in vocabularies and embedding files.
pub fn token_key(token: &Token) -> String {
    match token {
        Token::Word(w) => w.clone(),
        Token::Concept(c) => concept_key(c),
    }
}

pub fn concept_key(concept_id: &str) -> String {
    format!("{CONCEPT_PREFIX}{concept_id}")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KindFilter {
    All,
    ConceptsOnly,
}

/// Pruning thresholds, per token kind.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MinCount {
    pub words: u64,
    pub concepts: u64,
}

impl MinCount {
    pub fn uniform(n: u64) -> Self {
        MinCount {
            words: n,
            concepts: n,
        }
    }

    fn for_kind(&self, kind: TokenKind) -> u64 {
        match kind {
            TokenKind::Word => self.words,
            TokenKind::Concept => self.concepts,
        }
    }
}

impl Default for MinCount {
    fn default() -> Self {
        MinCount {
            words: 5,
            concepts: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VocabEntry {
    pub key: String,
    pub kind: TokenKind,
    pub count: u64,
}

/// Dense id-indexed lexicon. Ids are ordered by descending count, ties by
/// ascending key.
#[derive(Clone, Debug)]
pub struct Vocabulary {
    entries: Vec<VocabEntry>,
    index: HashMap<String, u32>,
    noise: Vec<f64>,
}

/// Token counts accumulated over one or more streams. Counters built on
/// separate workers can be merged.
#[derive(Clone, Debug, Default)]
pub struct TokenCounts {
    counts: HashMap<(TokenKind, String), u64>,
}

impl TokenCounts {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, token: &Token, filter: KindFilter) {
        let (kind, key) = match token {
            Token::Word(_) if filter == KindFilter::ConceptsOnly => return,
            Token::Word(w) => (TokenKind::Word, w.clone()),
            Token::Concept(_) => (TokenKind::Concept, token_key(token)),
        };
        *self.counts.entry((kind, key)).or_insert(0) += 1;
    }

    pub fn add_stream(&mut self, stream: &[Token], filter: KindFilter) {
        for token in stream {
            self.add(token, filter);
        }
    }

    pub fn merge(&mut self, other: TokenCounts) {
        for (k, v) in other.counts {
            *self.counts.entry(k).or_insert(0) += v;
        }
    }

    pub fn into_vocabulary(self, min_count: MinCount) -> Result<Vocabulary> {
        let entries = self
            .counts
            .into_iter()
            .filter(|((kind, _), count)| *count >= min_count.for_kind(*kind))
            .map(|((kind, key), count)| VocabEntry { key, kind, count })
            .collect();
        Vocabulary::from_entries(entries)
    }
}

/// Counts tokens over all streams, prunes and re-indexes.
pub fn build_vocabulary<'a, I>(
    streams: I,
    min_count: MinCount,
    filter: KindFilter,
) -> Result<Vocabulary>
where
    I: IntoIterator<Item = &'a [Token]>,
{
    if min_count.words == 0 || min_count.concepts == 0 {
        return Err(Error::Config("min_count must be at least 1".into()));
    }
    let mut counts = TokenCounts::new();
    for stream in streams {
        counts.add_stream(stream, filter);
    }
    counts.into_vocabulary(min_count)
}

/// Unigram counts raised to `exponent`, normalized to sum to one.
pub fn noise_distribution(counts: impl IntoIterator<Item = u64>, exponent: f64) -> Vec<f64> {
    let raised: Vec<f64> = counts
        .into_iter()
        .map(|c| (c as f64).powf(exponent))
        .collect();
    let total: f64 = raised.iter().sum();
    raised.into_iter().map(|r| r / total).collect()
}

impl Vocabulary {
    /// Builds a vocabulary from unordered entries. Entries are sorted by
    /// descending count then ascending key and assigned dense ids.
    pub fn from_entries(mut entries: Vec<VocabEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        entries.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.key.cmp(&b.key)));
        let mut index = HashMap::with_capacity(entries.len());
        for (id, entry) in entries.iter().enumerate() {
            if index.insert(entry.key.clone(), id as u32).is_some() {
                return Err(Error::Config(format!(
                    "duplicate vocabulary key {}",
                    entry.key
                )));
            }
        }
        let noise = noise_distribution(entries.iter().map(|e| e.count), NOISE_EXPONENT);
        Ok(Vocabulary {
            entries,
            index,
            noise,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[VocabEntry] {
        &self.entries
    }

    pub fn entry(&self, id: u32) -> &VocabEntry {
        &self.entries[id as usize]
    }

    pub fn id(&self, key: &str) -> Option<u32> {
        self.index.get(key).copied()
    }

    pub fn token_id(&self, token: &Token) -> Option<u32> {
        match token {
            Token::Word(w) => self.id(w),
            Token::Concept(c) => self.id(&concept_key(c)),
        }
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.key.as_str())
    }

    /// Negative-sampling distribution, indexed by id.
    pub fn noise(&self) -> &[f64] {
        &self.noise
    }

    /// Maps a stream onto vocabulary ids, dropping out-of-vocabulary tokens.
    pub fn encode(&self, stream: &[Token]) -> Vec<u32> {
        stream.iter().filter_map(|t| self.token_id(t)).collect()
    }

    /// Writes `id<TAB>kind<TAB>key<TAB>count` lines sorted by id.
    pub fn write_tsv<W: Write>(&self, mut writer: W) -> Result<()> {
        for (id, e) in self.entries.iter().enumerate() {
            writeln!(writer, "{id}\t{}\t{}\t{}", e.kind.as_str(), e.key, e.count)?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn read_tsv<R: BufRead>(reader: R, source_name: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let bad = |msg: &str| Error::format(source_name, idx + 1, msg);
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 4 {
                return Err(bad("expected `id<TAB>kind<TAB>key<TAB>count`"));
            }
            let id: usize = cols[0].parse().map_err(|_| bad("invalid id"))?;
            if id != entries.len() {
                return Err(bad("ids must be dense and sorted"));
            }
            let kind = match cols[1] {
                "word" => TokenKind::Word,
                "concept" => TokenKind::Concept,
                _ => return Err(bad("kind must be `word` or `concept`")),
            };
            let count: u64 = cols[3].parse().map_err(|_| bad("invalid count"))?;
            entries.push(VocabEntry {
                key: cols[2].to_owned(),
                kind,
                count,
            });
        }
        let vocab = Self::from_entries(entries)?;
        Ok(vocab)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn words(spec: &[(&str, usize)]) -> Vec<Token> {
        spec.iter()
            .flat_map(|(w, n)| std::iter::repeat_n(Token::Word(w.to_string()), *n))
            .collect()
    }

    #[test]
    fn prunes_below_min_count() {
        let stream = words(&[("a", 3), ("b", 1)]);
        let vocab =
            build_vocabulary([stream.as_slice()], MinCount::uniform(2), KindFilter::All).unwrap();
        assert_eq!(vocab.len(), 1);
        assert_eq!(vocab.id("a"), Some(0));
        assert_eq!(vocab.id("b"), None);
    }

    #[test]
    fn symmetric_noise() {
        let stream = words(&[("a", 2), ("b", 2)]);
        let vocab =
            build_vocabulary([stream.as_slice()], MinCount::uniform(1), KindFilter::All).unwrap();
        assert_eq!(vocab.noise(), &[0.5, 0.5]);
    }

    #[test]
    fn noise_uses_three_quarter_power() {
        let stream = words(&[("a", 16), ("b", 1)]);
        let vocab =
            build_vocabulary([stream.as_slice()], MinCount::uniform(1), KindFilter::All).unwrap();
        // 16^0.75 = 8
        assert!((vocab.noise()[vocab.id("a").unwrap() as usize] - 8.0 / 9.0).abs() < 1e-15);
        assert!((vocab.noise()[vocab.id("b").unwrap() as usize] - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn empty_vocabulary_is_error() {
        let stream = words(&[("a", 1)]);
        let err = build_vocabulary([stream.as_slice()], MinCount::uniform(2), KindFilter::All)
            .unwrap_err();
        assert!(matches!(err, Error::EmptyVocabulary));
        assert!(
            build_vocabulary([stream.as_slice()], MinCount::uniform(0), KindFilter::All).is_err()
        );
    }

    #[test]
    fn default_thresholds_differ_by_kind() {
        let mut stream = words(&[("a", 4)]);
        stream.push(Token::Concept("C1".into()));
        let vocab =
            build_vocabulary([stream.as_slice()], MinCount::default(), KindFilter::All).unwrap();
        assert_eq!(vocab.keys().collect::<Vec<_>>(), vec!["c:C1"]);
    }

    #[test]
    fn concepts_only_filter() {
        let mut stream = words(&[("a", 4)]);
        stream.push(Token::Concept("C1".into()));
        let vocab = build_vocabulary(
            [stream.as_slice()],
            MinCount::uniform(1),
            KindFilter::ConceptsOnly,
        )
        .unwrap();
        assert_eq!(vocab.len(), 1);
        assert_eq!(vocab.entry(0).kind, TokenKind::Concept);
    }

    #[test]
    fn ties_broken_by_key() {
        let stream = words(&[("b", 2), ("a", 2), ("c", 3)]);
        let vocab =
            build_vocabulary([stream.as_slice()], MinCount::uniform(1), KindFilter::All).unwrap();
        assert_eq!(vocab.keys().collect::<Vec<_>>(), vec!["c", "a", "b"]);
    }

    #[test]
    fn merged_counts_match_single_pass() {
        let s1 = words(&[("a", 2), ("b", 1)]);
        let s2 = words(&[("b", 3), ("c", 1)]);
        let mut left = TokenCounts::new();
        left.add_stream(&s1, KindFilter::All);
        let mut right = TokenCounts::new();
        right.add_stream(&s2, KindFilter::All);
        right.merge(left);
        let merged = right.into_vocabulary(MinCount::uniform(1)).unwrap();
        let single = build_vocabulary(
            [s1.as_slice(), s2.as_slice()],
            MinCount::uniform(1),
            KindFilter::All,
        )
        .unwrap();
        assert_eq!(merged.entries(), single.entries());
    }

    #[test]
    fn tsv_round_trip() {
        let mut stream = words(&[("a", 3), ("b", 1)]);
        stream.push(Token::Concept("C9".into()));
        let vocab =
            build_vocabulary([stream.as_slice()], MinCount::uniform(1), KindFilter::All).unwrap();
        let mut buf = Vec::new();
        vocab.write_tsv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "0\tword\ta\t3\n1\tword\tb\t1\n2\tconcept\tc:C9\t1\n"
        );
        let back = Vocabulary::read_tsv(buf.as_slice(), "v").unwrap();
        assert_eq!(back.entries(), vocab.entries());
        assert!(Vocabulary::read_tsv("1\tword\ta\t3\n".as_bytes(), "v").is_err());
    }

    proptest! {
        #[test]
        fn ids_and_noise_invariants(counts in proptest::collection::vec(1usize..50, 1..40)) {
            let stream: Vec<Token> = counts
                .iter()
                .enumerate()
                .flat_map(|(i, n)| std::iter::repeat_n(Token::Word(format!("w{i}")), *n))
                .collect();
            let vocab = build_vocabulary([stream.as_slice()], MinCount::uniform(1), KindFilter::All).unwrap();
            prop_assert_eq!(vocab.len(), counts.len());
            for id in 0..vocab.len() as u32 {
                prop_assert_eq!(vocab.id(&vocab.entry(id).key), Some(id));
            }
            let sum: f64 = vocab.noise().iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-9);
            for id in 0..vocab.len() {
                prop_assert!(vocab.noise()[id] > 0.0);
                if id > 0 {
                    // ids are sorted by descending count, so noise is non-increasing
                    prop_assert!(vocab.noise()[id] <= vocab.noise()[id - 1]);
                }
            }
        }
    }
}
