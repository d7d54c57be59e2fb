//! Concept-annotated corpus parsing.
//!
//! The corpus is UTF-8 text made of document groups separated by blank
//! lines. The first line of a group is `#doc <doc_id>`; the remaining lines
//! are running text in which concept mentions are written as
//! `[[<concept_id>|<surface text>]]`. A literal `[[` is written `\[\[`.
//!
//! ```text
//! #doc 42
//! the [[C42|big apple]] is large
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::BufRead;

use crate::error::{Error, Result};

/// One token of an annotated document.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Token {
    /// A normalized (lowercased, punctuation-stripped) word.
    Word(String),
    /// A mention of a concept, by canonical concept id.
    Concept(String),
}

impl Token {
    pub fn is_concept(&self) -> bool {
        matches!(self, Token::Concept(_))
    }
}

/// Ordered tokens fed to the trainer.
pub type TokenStream = Vec<Token>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnnotatedDocument {
    pub doc_id: String,
    pub tokens: Vec<Token>,
}

/// Mixed word and concept stream used by the CRC model.
pub fn crc_stream(doc: &AnnotatedDocument) -> TokenStream {
    doc.tokens.clone()
}

/// Concept-only stream used by the 3C model. Order is preserved.
pub fn threec_stream(doc: &AnnotatedDocument) -> TokenStream {
    doc.tokens
        .iter()
        .filter(|t| t.is_concept())
        .cloned()
        .collect()
}

/// Which stream a document is turned into before training.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StreamKind {
    Crc,
    ThreeC,
}

impl StreamKind {
    pub fn stream(self, doc: &AnnotatedDocument) -> TokenStream {
        match self {
            StreamKind::Crc => crc_stream(doc),
            StreamKind::ThreeC => threec_stream(doc),
        }
    }
}

/// Lowercases a raw whitespace-delimited chunk and strips surrounding
/// punctuation. Returns `None` when nothing is left.
pub fn normalize_word(raw: &str) -> Option<String> {
    let trimmed = raw.trim_matches(|c: char| !c.is_alphanumeric());
    if trimmed.is_empty() {
        None
    } else {
        Some(trimmed.to_lowercase())
    }
}

/// Splits plain text into normalized word tokens.
pub fn tokenize_words(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split_whitespace().filter_map(normalize_word)
}

fn valid_concept_id(id: &str) -> bool {
    !id.is_empty()
        && !id
            .chars()
            .any(|c| c.is_whitespace() || c == '|' || c == '[' || c == ']')
}

/// Alias to canonical concept id mapping. Chains are collapsed on
/// construction so every lookup takes at most one hop.
#[derive(Clone, Debug, Default)]
pub struct RedirectMap {
    mapping: HashMap<String, String>,
}

impl RedirectMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds the map from raw `(alias, target)` pairs, collapsing chains.
    /// Self-redirects are dropped; cycles are an error.
    pub fn from_pairs<I, S>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, S)>,
        S: Into<String>,
    {
        let raw: HashMap<String, String> = pairs
            .into_iter()
            .map(|(a, b)| (a.into(), b.into()))
            .filter(|(a, b)| a != b)
            .collect();

        let mut mapping = HashMap::with_capacity(raw.len());
        for alias in raw.keys() {
            let mut current = alias;
            let mut hops = 0;
            while let Some(next) = raw.get(current) {
                current = next;
                hops += 1;
                if hops > raw.len() {
                    return Err(Error::RedirectCycle(alias.clone()));
                }
            }
            mapping.insert(alias.clone(), current.clone());
        }
        Ok(RedirectMap { mapping })
    }

    /// Reads the two-column TSV `alias_id<TAB>canonical_id`.
    pub fn read_tsv<R: BufRead>(reader: R, source_name: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut cols = line.split('\t');
            match (cols.next(), cols.next(), cols.next()) {
                (Some(a), Some(b), None)
                    if valid_concept_id(a.trim()) && valid_concept_id(b.trim()) =>
                {
                    pairs.push((a.trim().to_owned(), b.trim().to_owned()))
                }
                _ => {
                    return Err(Error::format(
                        source_name,
                        idx + 1,
                        "expected `alias_id<TAB>canonical_id`",
                    ))
                }
            }
        }
        Self::from_pairs(pairs)
    }

    pub fn resolve<'a>(&'a self, id: &'a str) -> &'a str {
        self.mapping.get(id).map(String::as_str).unwrap_or(id)
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }
}

/// Parses one content line, appending tokens to `out`.
fn parse_line(line: &str, redirects: &RedirectMap, out: &mut Vec<Token>) -> Result<(), String> {
    let mut text = String::new();
    let bytes = line.as_bytes();
    let mut i = 0;

    let flush = |text: &mut String, out: &mut Vec<Token>| {
        out.extend(tokenize_words(text).map(Token::Word));
        text.clear();
    };

    while i < line.len() {
        let rest = &line[i..];
        if bytes[i] == b'\\' && rest[1..].starts_with('[') {
            text.push('[');
            i += 2;
        } else if rest.starts_with("[[") {
            let end = rest
                .find("]]")
                .ok_or_else(|| "unterminated concept mention".to_owned())?;
            let inner = &rest[2..end];
            let id = inner
                .split_once('|')
                .map(|(id, _)| id)
                .unwrap_or(inner)
                .trim();
            if !valid_concept_id(id) {
                return Err(format!("invalid concept id {id:?}"));
            }
            flush(&mut text, out);
            out.push(Token::Concept(redirects.resolve(id).to_owned()));
            i += end + 2;
        } else {
            let ch = rest.chars().next().unwrap();
            text.push(ch);
            i += ch.len_utf8();
        }
    }
    flush(&mut text, out);
    Ok(())
}

/// Streaming corpus parser.
///
/// Documents without any token are skipped and counted; see
/// [`CorpusReader::skipped_empty`].
pub struct CorpusReader<'r, R> {
    lines: std::io::Lines<R>,
    redirects: &'r RedirectMap,
    source_name: String,
    line_no: usize,
    skipped_empty: usize,
    done: bool,
}

impl<'r, R: BufRead> CorpusReader<'r, R> {
    pub fn new(reader: R, redirects: &'r RedirectMap, source_name: impl Into<String>) -> Self {
        CorpusReader {
            lines: reader.lines(),
            redirects,
            source_name: source_name.into(),
            line_no: 0,
            skipped_empty: 0,
            done: false,
        }
    }

    /// Number of empty documents skipped so far.
    pub fn skipped_empty(&self) -> usize {
        self.skipped_empty
    }

    fn next_line(&mut self) -> Option<Result<String>> {
        let line = self.lines.next()?;
        self.line_no += 1;
        Some(line.map_err(Error::from))
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::format(self.source_name.clone(), self.line_no, message)
    }

    fn read_document(&mut self) -> Option<Result<AnnotatedDocument>> {
        // Skip blank lines between groups.
        let header = loop {
            match self.next_line()? {
                Ok(line) if line.trim().is_empty() => continue,
                Ok(line) => break line,
                Err(e) => return Some(Err(e)),
            }
        };

        let doc_id = match header.strip_prefix("#doc") {
            Some(rest) if rest.starts_with(char::is_whitespace) && !rest.trim().is_empty() => {
                rest.trim().to_owned()
            }
            _ => return Some(Err(self.err("expected `#doc <doc_id>` header"))),
        };

        let mut tokens = Vec::new();
        while let Some(line) = self.next_line() {
            let line = match line {
                Ok(line) => line,
                Err(e) => return Some(Err(e)),
            };
            if line.trim().is_empty() {
                break;
            }
            if let Err(message) = parse_line(&line, self.redirects, &mut tokens) {
                return Some(Err(self.err(message)));
            }
        }
        Some(Ok(AnnotatedDocument { doc_id, tokens }))
    }
}

impl<R: BufRead> Iterator for CorpusReader<'_, R> {
    type Item = Result<AnnotatedDocument>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        loop {
            match self.read_document() {
                None => {
                    self.done = true;
                    return None;
                }
                Some(Ok(doc)) if doc.tokens.is_empty() => {
                    log::warn!(
                        "{}: skipping empty document {}",
                        self.source_name,
                        doc.doc_id
                    );
                    self.skipped_empty += 1;
                }
                Some(Err(e)) => {
                    self.done = true;
                    return Some(Err(e));
                }
                Some(ok) => return Some(ok),
            }
        }
    }
}

/// Parses a whole corpus into memory.
pub fn parse_corpus<R: BufRead>(
    reader: R,
    redirects: &RedirectMap,
    source_name: &str,
) -> Result<ParsedCorpus> {
    let mut parser = CorpusReader::new(reader, redirects, source_name);
    let documents = parser.by_ref().collect::<Result<Vec<_>>>()?;
    Ok(ParsedCorpus {
        documents,
        skipped_empty: parser.skipped_empty(),
    })
}

#[derive(Clone, Debug, Default)]
pub struct ParsedCorpus {
    pub documents: Vec<AnnotatedDocument>,
    pub skipped_empty: usize,
}

fn escape_brackets(word: &str, out: &mut String) {
    for ch in word.chars() {
        if ch == '[' {
            out.push('\\');
        }
        out.push(ch);
    }
}

/// Writes a document back in corpus format. Concept surfaces are not kept by
/// the parser, so the concept id doubles as the surface text.
pub fn serialize_document(doc: &AnnotatedDocument) -> String {
    let mut out = String::new();
    writeln!(out, "#doc {}", doc.doc_id).unwrap();
    for (i, token) in doc.tokens.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        match token {
            Token::Word(w) => escape_brackets(w, &mut out),
            Token::Concept(c) => write!(out, "[[{c}|{c}]]").unwrap(),
        }
    }
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(s: &str) -> Token {
        Token::Word(s.to_owned())
    }

    fn c(s: &str) -> Token {
        Token::Concept(s.to_owned())
    }

    fn parse(text: &str, redirects: &RedirectMap) -> Result<ParsedCorpus> {
        parse_corpus(text.as_bytes(), redirects, "test")
    }

    #[test]
    fn mention_replaces_surface() {
        let parsed = parse(
            "#doc d1\nthe [[C42|big apple]] is large\n",
            &RedirectMap::new(),
        )
        .unwrap();
        assert_eq!(parsed.documents.len(), 1);
        assert_eq!(
            parsed.documents[0].tokens,
            vec![w("the"), c("C42"), w("is"), w("large")]
        );
    }

    #[test]
    fn mentions_are_redirected() {
        let redirects = RedirectMap::from_pairs([("C7", "C1")]).unwrap();
        let parsed = parse("#doc d\n[[C7|x]]\n", &redirects).unwrap();
        assert_eq!(parsed.documents[0].tokens, vec![c("C1")]);
    }

    #[test]
    fn redirect_chains_collapse() {
        let redirects = RedirectMap::from_pairs([("A", "B"), ("B", "C")]).unwrap();
        assert_eq!(redirects.resolve("A"), "C");
        assert_eq!(redirects.resolve("B"), "C");
        assert_eq!(redirects.resolve("C"), "C");
        // Idempotent after one application.
        assert_eq!(redirects.resolve(redirects.resolve("A")), "C");
    }

    #[test]
    fn redirect_cycle_is_rejected() {
        let err = RedirectMap::from_pairs([("A", "B"), ("B", "A")]).unwrap_err();
        assert!(matches!(err, Error::RedirectCycle(_)));
    }

    #[test]
    fn redirect_tsv() {
        let map = RedirectMap::read_tsv("a\tb\n\nb\tc\n".as_bytes(), "r.tsv").unwrap();
        assert_eq!(map.resolve("a"), "c");
        let err = RedirectMap::read_tsv("a b\n".as_bytes(), "r.tsv").unwrap_err();
        assert!(err.to_string().starts_with("r.tsv:1:"));
    }

    #[test]
    fn unterminated_mention_reports_line() {
        let err = parse(
            "#doc a\nfine\n\n#doc b\nok [[C1|oops\n",
            &RedirectMap::new(),
        )
        .unwrap_err();
        match err {
            Error::Format { line, message, .. } => {
                assert_eq!(line, 5);
                assert!(message.contains("unterminated"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_header_is_error() {
        assert!(parse("hello world\n", &RedirectMap::new()).is_err());
        assert!(parse("#doc\nhello\n", &RedirectMap::new()).is_err());
    }

    #[test]
    fn empty_documents_are_skipped() {
        let parsed = parse(
            "#doc a\n...\n\n#doc b\nword\n\n#doc c\n",
            &RedirectMap::new(),
        )
        .unwrap();
        assert_eq!(parsed.documents.len(), 1);
        assert_eq!(parsed.documents[0].doc_id, "b");
        assert_eq!(parsed.skipped_empty, 2);
    }

    #[test]
    fn words_are_normalized() {
        let parsed = parse(
            "#doc a\n\"Hello,\" World! -- (don't)\n",
            &RedirectMap::new(),
        )
        .unwrap();
        assert_eq!(
            parsed.documents[0].tokens,
            vec![w("hello"), w("world"), w("don't")]
        );
    }

    #[test]
    fn escaped_brackets_are_literal() {
        let parsed = parse("#doc a\nx\\[\\[y [[C1|z]]\n", &RedirectMap::new()).unwrap();
        assert_eq!(parsed.documents[0].tokens, vec![w("x[[y"), c("C1")]);
    }

    #[test]
    fn multi_line_documents_concatenate() {
        let parsed = parse(
            "#doc a\none [[C1|x]]\ntwo\n\n\n#doc b\nthree\n",
            &RedirectMap::new(),
        )
        .unwrap();
        assert_eq!(
            parsed.documents[0].tokens,
            vec![w("one"), c("C1"), w("two")]
        );
        assert_eq!(parsed.documents[1].tokens, vec![w("three")]);
    }

    #[test]
    fn streams() {
        let doc = AnnotatedDocument {
            doc_id: "d".into(),
            tokens: vec![w("a"), c("C1"), w("b"), c("C2")],
        };
        assert_eq!(crc_stream(&doc), doc.tokens);
        assert_eq!(threec_stream(&doc), vec![c("C1"), c("C2")]);

        let words_only = AnnotatedDocument {
            doc_id: "d".into(),
            tokens: vec![w("a"), w("b")],
        };
        assert_eq!(crc_stream(&words_only), words_only.tokens);
        assert!(threec_stream(&words_only).is_empty());
    }

    fn arb_token() -> impl Strategy<Value = Token> {
        prop_oneof![
            "[a-zé0-9]([a-z0-9\\[\\]\\\\|'#-]{0,6}[a-z0-9])?".prop_map(Token::Word),
            "[A-Za-z0-9_:.-]{1,8}".prop_map(Token::Concept),
        ]
    }

    proptest! {
        #[test]
        fn serialize_round_trips(tokens in proptest::collection::vec(arb_token(), 1..20)) {
            let doc = AnnotatedDocument { doc_id: "doc".into(), tokens };
            let text = serialize_document(&doc);
            let parsed = parse(&text, &RedirectMap::new()).unwrap();
            prop_assert_eq!(parsed.documents, vec![doc]);
        }

        #[test]
        fn threec_is_filtered_crc(tokens in proptest::collection::vec(arb_token(), 0..30)) {
            let doc = AnnotatedDocument { doc_id: "doc".into(), tokens };
            let filtered: Vec<_> = crc_stream(&doc).into_iter().filter(Token::is_concept).collect();
            prop_assert_eq!(threec_stream(&doc), filtered);
        }
    }
}
