//! Vocabulary, author registry and document corpora, plus the line-oriented
//! text formats they are stored in.
//!
//! Vocabulary and author files hold one entry per line; the zero-based line
//! index is the id. A corpus file holds one document per line:
//!
//! ```text
//! # comment
//! 0 1 | 3 3 5
//! 2 |
//! ```
//!
//! Author ids come first, then `" | "`, then the token ids of the document in
//! order (with repetition). Blank lines and lines starting with `#` are skipped.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::BufRead;

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use thiserror::Error;

use crate::rng::ChainRng;

#[derive(Debug, Error, PartialEq)]
pub enum CorpusError {
    #[error("line {0}: duplicate entry")]
    DuplicateWord(usize),
    #[error("line {0}: empty entry")]
    EmptyWord(usize),
    #[error("line {0}: malformed document line")]
    BadFormat(usize),
    #[error("line {line}: token id {id} is outside the vocabulary")]
    TokenIdOutOfRange { line: usize, id: usize },
    #[error("line {line}: author id {id} is outside the author registry")]
    AuthorIdOutOfRange { line: usize, id: usize },
    #[error("line {0}: document has no authors")]
    NoAuthors(usize),
    #[error("line {line}: author id {id} listed twice")]
    DuplicateAuthor { line: usize, id: usize },
    #[error("corpus has no documents")]
    EmptyCorpus,
    #[error("test fraction {0} is not in (0, 1)")]
    BadFraction(f64),
    #[error("requested {requested} training positions but the document has {available}")]
    NTrainTooLarge { requested: usize, available: usize },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for CorpusError {
    fn from(e: std::io::Error) -> Self {
        CorpusError::Io(e.to_string())
    }
}

/// Dense string <-> id table shared by the vocabulary and the author registry.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct Lexicon {
    entries: Vec<String>,
    ids: HashMap<String, usize>,
}

impl Lexicon {
    fn from_entries<I, S>(entries: I) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut lex = Lexicon::default();
        for (i, entry) in entries.into_iter().enumerate() {
            let entry = entry.into();
            let line = i + 1;
            if entry.is_empty() {
                return Err(CorpusError::EmptyWord(line));
            }
            if lex.ids.contains_key(&entry) {
                return Err(CorpusError::DuplicateWord(line));
            }
            lex.ids.insert(entry.clone(), i);
            lex.entries.push(entry);
        }
        Ok(lex)
    }

    fn parse<R: BufRead>(reader: R) -> Result<Self, CorpusError> {
        let lines = reader.lines().collect::<Result<Vec<_>, _>>()?;
        // tolerate CRLF files
        Self::from_entries(lines.into_iter().map(|l| match l.strip_suffix('\r') {
            Some(s) => s.to_string(),
            None => l,
        }))
    }

    fn serialize(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(e);
            out.push('\n');
        }
        out
    }
}

/// Ordered set of distinct word strings; a word's id is its position.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary(Lexicon);

impl Vocabulary {
    pub fn new<I, S>(words: I) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Lexicon::from_entries(words).map(Vocabulary)
    }

    /// Parses one word per line; line k becomes word id k.
    pub fn parse<R: BufRead>(reader: R) -> Result<Self, CorpusError> {
        Lexicon::parse(reader).map(Vocabulary)
    }

    pub fn len(&self) -> usize {
        self.0.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.entries.is_empty()
    }

    pub fn word(&self, id: usize) -> Option<&str> {
        self.0.entries.get(id).map(String::as_str)
    }

    pub fn id(&self, word: &str) -> Option<usize> {
        self.0.ids.get(word).copied()
    }

    pub fn serialize(&self) -> String {
        self.0.serialize()
    }
}

/// Ordered set of distinct author names; an author's id is its position.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AuthorRegistry(Lexicon);

impl AuthorRegistry {
    pub fn new<I, S>(names: I) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Lexicon::from_entries(names).map(AuthorRegistry)
    }

    pub fn parse<R: BufRead>(reader: R) -> Result<Self, CorpusError> {
        Lexicon::parse(reader).map(AuthorRegistry)
    }

    pub fn len(&self) -> usize {
        self.0.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.entries.is_empty()
    }

    pub fn name(&self, id: usize) -> Option<&str> {
        self.0.entries.get(id).map(String::as_str)
    }

    pub fn id(&self, name: &str) -> Option<usize> {
        self.0.ids.get(name).copied()
    }

    pub fn serialize(&self) -> String {
        self.0.serialize()
    }
}

/// A document: its word tokens in order and its (distinct) authors.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Document {
    pub tokens: Vec<usize>,
    pub authors: Vec<usize>,
}

impl Document {
    pub fn new(authors: Vec<usize>, tokens: Vec<usize>) -> Self {
        Document { tokens, authors }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Canonical corpus-file line for this document.
    pub fn to_line(&self) -> String {
        let mut line = String::new();
        for (i, a) in self.authors.iter().enumerate() {
            if i > 0 {
                line.push(' ');
            }
            write!(line, "{a}").unwrap();
        }
        line.push_str(" |");
        for t in &self.tokens {
            write!(line, " {t}").unwrap();
        }
        line
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub documents: Vec<Document>,
    pub vocabulary: Vocabulary,
    pub authors: AuthorRegistry,
    total_tokens: usize,
}

impl Corpus {
    /// Builds a corpus, checking every token and author id against the
    /// vocabulary and registry. Line numbers in errors are document indices + 1.
    pub fn new(
        documents: Vec<Document>,
        vocabulary: Vocabulary,
        authors: AuthorRegistry,
    ) -> Result<Self, CorpusError> {
        for (i, doc) in documents.iter().enumerate() {
            check_document(doc, i + 1, vocabulary.len(), authors.len())?;
        }
        let total_tokens = documents.iter().map(Document::len).sum();
        Ok(Corpus {
            documents,
            vocabulary,
            authors,
            total_tokens,
        })
    }

    /// Parses a corpus file against an existing vocabulary and registry.
    pub fn parse<R: BufRead>(
        reader: R,
        vocabulary: Vocabulary,
        authors: AuthorRegistry,
    ) -> Result<Self, CorpusError> {
        let mut documents = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = i + 1;
            let trimmed = line.trim_end_matches('\r');
            if trimmed.trim().is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let doc = parse_document_line(trimmed, lineno)?;
            check_document(&doc, lineno, vocabulary.len(), authors.len())?;
            documents.push(doc);
        }
        let total_tokens = documents.iter().map(Document::len).sum();
        Ok(Corpus {
            documents,
            vocabulary,
            authors,
            total_tokens,
        })
    }

    pub fn num_documents(&self) -> usize {
        self.documents.len()
    }

    pub fn vocab_size(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn num_authors(&self) -> usize {
        self.authors.len()
    }

    pub fn total_tokens(&self) -> usize {
        self.total_tokens
    }

    /// Author ids in the registry that no document lists.
    pub fn unused_authors(&self) -> Vec<usize> {
        let counts = self.papers_per_author();
        (0..counts.len()).filter(|&k| counts[k] == 0).collect()
    }

    /// Number of documents each author appears on.
    pub fn papers_per_author(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_authors()];
        for doc in &self.documents {
            for &a in &doc.authors {
                counts[a] += 1;
            }
        }
        counts
    }

    /// Canonical text form: one line per document, no comments.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for doc in &self.documents {
            out.push_str(&doc.to_line());
            out.push('\n');
        }
        out
    }

    fn with_documents(&self, documents: Vec<Document>) -> Corpus {
        let total_tokens = documents.iter().map(Document::len).sum();
        Corpus {
            documents,
            vocabulary: self.vocabulary.clone(),
            authors: self.authors.clone(),
            total_tokens,
        }
    }
}

fn parse_document_line(line: &str, lineno: usize) -> Result<Document, CorpusError> {
    let (left, right) = line.split_once('|').ok_or(CorpusError::BadFormat(lineno))?;
    if right.contains('|') {
        return Err(CorpusError::BadFormat(lineno));
    }
    let parse_ids = |s: &str| -> Result<Vec<usize>, CorpusError> {
        s.split_whitespace()
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| CorpusError::BadFormat(lineno))
            })
            .collect()
    };
    let authors = parse_ids(left)?;
    let tokens = parse_ids(right)?;
    if authors.is_empty() {
        return Err(CorpusError::NoAuthors(lineno));
    }
    Ok(Document { tokens, authors })
}

fn check_document(doc: &Document, line: usize, v: usize, a: usize) -> Result<(), CorpusError> {
    if doc.authors.is_empty() {
        return Err(CorpusError::NoAuthors(line));
    }
    for (i, &id) in doc.authors.iter().enumerate() {
        if id >= a {
            return Err(CorpusError::AuthorIdOutOfRange { line, id });
        }
        if doc.authors[..i].contains(&id) {
            return Err(CorpusError::DuplicateAuthor { line, id });
        }
    }
    if let Some(&id) = doc.tokens.iter().find(|&&t| t >= v) {
        return Err(CorpusError::TokenIdOutOfRange { line, id });
    }
    Ok(())
}

/// Result of [`split_train_test`]. Document indices refer to the input corpus.
#[derive(Debug, Clone)]
pub struct TrainTestSplit {
    pub train: Corpus,
    pub test: Corpus,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub requested_test: usize,
}

impl TrainTestSplit {
    pub fn achieved_fraction(&self) -> f64 {
        let d = self.train_indices.len() + self.test_indices.len();
        self.test_indices.len() as f64 / d as f64
    }

    /// True when author coverage forced fewer test documents than requested.
    pub fn is_short(&self) -> bool {
        self.test_indices.len() < self.requested_test
    }
}

/// Splits documents so that every author of the corpus keeps at least one
/// training document.
///
/// Documents are shuffled with `seed` and moved to the test side one at a
/// time, skipping any whose removal would leave one of its authors without a
/// training document. When too few documents can be moved the split comes
/// back short; check [`TrainTestSplit::is_short`].
pub fn split_train_test(
    corpus: &Corpus,
    test_fraction: f64,
    seed: u64,
) -> Result<TrainTestSplit, CorpusError> {
    if corpus.documents.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(CorpusError::BadFraction(test_fraction));
    }
    let d = corpus.num_documents();
    let requested_test = (test_fraction * d as f64).round() as usize;

    let mut order: Vec<usize> = (0..d).collect();
    let mut rng = ChainRng::seed_from_u64(seed);
    order.shuffle(&mut rng);

    let mut train_docs_per_author = corpus.papers_per_author();
    let mut is_test = vec![false; d];
    let mut n_test = 0;
    for &i in &order {
        if n_test == requested_test {
            break;
        }
        let doc = &corpus.documents[i];
        if doc.authors.iter().all(|&a| train_docs_per_author[a] >= 2) {
            for &a in &doc.authors {
                train_docs_per_author[a] -= 1;
            }
            is_test[i] = true;
            n_test += 1;
        }
    }

    let (test_indices, train_indices): (Vec<usize>, Vec<usize>) = (0..d).partition(|&i| is_test[i]);
    let pick = |idx: &[usize]| idx.iter().map(|&i| corpus.documents[i].clone()).collect();
    Ok(TrainTestSplit {
        train: corpus.with_documents(pick(&train_indices)),
        test: corpus.with_documents(pick(&test_indices)),
        train_indices,
        test_indices,
        requested_test,
    })
}

/// Held-in / held-out token positions of one document, both ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldInSplit {
    pub heldin: Vec<usize>,
    pub heldout: Vec<usize>,
}

/// Picks `n_train` token positions uniformly without replacement.
pub fn split_document_foldin(
    doc: &Document,
    n_train: usize,
    seed: u64,
) -> Result<FoldInSplit, CorpusError> {
    let n = doc.len();
    if n_train > n {
        return Err(CorpusError::NTrainTooLarge {
            requested: n_train,
            available: n,
        });
    }
    let mut rng = ChainRng::seed_from_u64(seed);
    let mut heldin = index::sample(&mut rng, n, n_train).into_vec();
    heldin.sort_unstable();
    let mut mask = vec![false; n];
    for &p in &heldin {
        mask[p] = true;
    }
    let heldout = (0..n).filter(|&p| !mask[p]).collect();
    Ok(FoldInSplit { heldin, heldout })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn registry(n: usize) -> AuthorRegistry {
        AuthorRegistry::new((0..n).map(|i| format!("a{i}"))).unwrap()
    }

    fn vocab(n: usize) -> Vocabulary {
        Vocabulary::new((0..n).map(|i| format!("w{i}"))).unwrap()
    }

    #[test]
    fn vocabulary_lines() {
        let v = Vocabulary::parse("likelihood\nmixture\n".as_bytes()).unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(v.id("likelihood"), Some(0));
        assert_eq!(v.id("mixture"), Some(1));
        assert_eq!(v.word(1), Some("mixture"));

        assert!(Vocabulary::parse("".as_bytes()).unwrap().is_empty());
        assert_eq!(
            Vocabulary::parse("em\nem\n".as_bytes()),
            Err(CorpusError::DuplicateWord(2))
        );
        assert_eq!(
            Vocabulary::parse("em\n\nx\n".as_bytes()),
            Err(CorpusError::EmptyWord(2))
        );
    }

    #[test]
    fn document_lines() {
        let c = Corpus::parse("0 1 | 3 3 5\n0 |\n".as_bytes(), vocab(6), registry(2)).unwrap();
        assert_eq!(c.documents[0], Document::new(vec![0, 1], vec![3, 3, 5]));
        assert_eq!(c.documents[1], Document::new(vec![0], vec![]));
        assert_eq!(c.total_tokens(), 3);

        let err = Corpus::parse("| 3\n".as_bytes(), vocab(6), registry(2));
        assert_eq!(err, Err(CorpusError::NoAuthors(1)));
        let err = Corpus::parse("0 3 5\n".as_bytes(), vocab(6), registry(2));
        assert_eq!(err, Err(CorpusError::BadFormat(1)));
        let err = Corpus::parse("0 | 6\n".as_bytes(), vocab(6), registry(2));
        assert_eq!(err, Err(CorpusError::TokenIdOutOfRange { line: 1, id: 6 }));
        let err = Corpus::parse("# x\n\n2 | 1\n".as_bytes(), vocab(6), registry(2));
        assert_eq!(err, Err(CorpusError::AuthorIdOutOfRange { line: 3, id: 2 }));
        let err = Corpus::parse("1 1 | 1\n".as_bytes(), vocab(6), registry(2));
        assert_eq!(err, Err(CorpusError::DuplicateAuthor { line: 1, id: 1 }));
        let err = Corpus::parse("0 | x\n".as_bytes(), vocab(6), registry(2));
        assert_eq!(err, Err(CorpusError::BadFormat(1)));
    }

    #[test]
    fn unused_authors_are_reported() {
        let c = Corpus::parse("0 2 | 1\n".as_bytes(), vocab(2), registry(4)).unwrap();
        assert_eq!(c.unused_authors(), vec![1, 3]);
    }

    #[test]
    fn solo_author_document_stays_in_train() {
        let mut docs: Vec<Document> = (0..9)
            .map(|i| Document::new(vec![i % 3], vec![0]))
            .collect();
        docs.push(Document::new(vec![7], vec![1]));
        let c = Corpus::new(docs, vocab(2), registry(8)).unwrap();
        for seed in 0..50 {
            let s = split_train_test(&c, 0.5, seed).unwrap();
            assert!(s.train_indices.contains(&9));
        }
    }

    #[test]
    fn split_sizes_and_determinism() {
        let docs: Vec<Document> = (0..10)
            .map(|i| Document::new(vec![0, 1], vec![i % 3]))
            .collect();
        let c = Corpus::new(docs, vocab(3), registry(2)).unwrap();
        let a = split_train_test(&c, 0.2, 9).unwrap();
        let b = split_train_test(&c, 0.2, 9).unwrap();
        assert_eq!(a.test_indices.len(), 2);
        assert!(!a.is_short());
        assert_eq!(a.test_indices, b.test_indices);
        assert_eq!(a.train, b.train);
    }

    #[test]
    fn split_reports_shortfall() {
        let docs: Vec<Document> = (0..4).map(|i| Document::new(vec![i], vec![0])).collect();
        let c = Corpus::new(docs, vocab(1), registry(4)).unwrap();
        let s = split_train_test(&c, 0.5, 1).unwrap();
        assert!(s.is_short());
        assert_eq!(s.achieved_fraction(), 0.0);
        assert!(matches!(
            split_train_test(&c, 1.0, 1),
            Err(CorpusError::BadFraction(_))
        ));
        let empty = Corpus::new(vec![], vocab(1), registry(1)).unwrap();
        assert_eq!(
            split_train_test(&empty, 0.5, 1).unwrap_err(),
            CorpusError::EmptyCorpus
        );
    }

    #[test]
    fn foldin_boundaries() {
        let doc = Document::new(vec![0], (0..10).collect());
        let s = split_document_foldin(&doc, 0, 3).unwrap();
        assert!(s.heldin.is_empty());
        assert_eq!(s.heldout, (0..10).collect::<Vec<_>>());
        let s = split_document_foldin(&doc, 10, 3).unwrap();
        assert!(s.heldout.is_empty());
        let s = split_document_foldin(&doc, 4, 3).unwrap();
        assert_eq!(s.heldin.len(), 4);
        assert!(s.heldin.iter().all(|p| !s.heldout.contains(p)));
        assert_eq!(s.heldin.len() + s.heldout.len(), 10);
        assert_eq!(s, split_document_foldin(&doc, 4, 3).unwrap());
        assert_eq!(
            split_document_foldin(&doc, 11, 3),
            Err(CorpusError::NTrainTooLarge {
                requested: 11,
                available: 10
            })
        );
    }

    #[test]
    fn foldin_positions_are_uniform() {
        let doc = Document::new(vec![0], (0..10).collect());
        let draws = 20_000;
        let mut hits = [0usize; 10];
        for seed in 0..draws {
            for p in split_document_foldin(&doc, 4, seed).unwrap().heldin {
                hits[p] += 1;
            }
        }
        for h in hits {
            let freq = h as f64 / draws as f64;
            assert!((freq - 0.4).abs() <= 0.05 * 0.4, "frequency {freq}");
        }
    }

    fn arb_corpus() -> impl Strategy<Value = Corpus> {
        (1usize..6, 1usize..8).prop_flat_map(|(a, v)| {
            let doc = (
                proptest::sample::subsequence((0..a).collect::<Vec<_>>(), 1..=a),
                proptest::collection::vec(0..v, 0..6),
            );
            proptest::collection::vec(doc, 1..25).prop_map(move |docs| {
                let docs = docs
                    .into_iter()
                    .map(|(au, t)| Document::new(au, t))
                    .collect();
                Corpus::new(docs, vocab(v), registry(a)).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn split_keeps_every_author_in_train(c in arb_corpus(), frac in 0.05f64..0.95, seed in any::<u64>()) {
            let s = split_train_test(&c, frac, seed).unwrap();
            let mut all: Vec<usize> = s.train_indices.iter().chain(&s.test_indices).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..c.num_documents()).collect::<Vec<_>>());
            let before = c.papers_per_author();
            let after = s.train.papers_per_author();
            for k in 0..before.len() {
                prop_assert!(before[k] == 0 || after[k] >= 1);
            }
            prop_assert!(s.test_indices.len() <= s.requested_test);
        }

        #[test]
        fn corpus_text_round_trips(c in arb_corpus()) {
            let text = c.serialize();
            let back = Corpus::parse(text.as_bytes(), c.vocabulary.clone(), c.authors.clone()).unwrap();
            prop_assert_eq!(back.serialize(), text);
            prop_assert_eq!(back, c);
        }
    }
}
