//! Model configuration, per-token assignments and the count tables that are
//! the sufficient statistics of every model kind, plus the smoothed point
//! estimates computed from them.

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use rand::SeedableRng;
use thiserror::Error;

use crate::corpus::Corpus;
use crate::rng::{uniform, ChainRng};

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("alpha and beta must be positive and finite (alpha={alpha}, beta={beta})")]
    BadHyperparameters { alpha: f64, beta: f64 },
    #[error("topic count must be at least 1")]
    NoTopics,
    #[error("corpus has no tokens")]
    EmptyCorpus,
    #[error("unknown model kind {0:?}")]
    UnknownKind(String),
    #[error("assignments do not match the corpus shape: {0}")]
    ShapeMismatch(String),
    #[error("token ({doc}, {pos}) has not been removed from the counts")]
    NotDecremented { doc: usize, pos: usize },
    #[error("token ({doc}, {pos}) is out of range")]
    TokenOutOfRange { doc: usize, pos: usize },
    #[error("outcome {0} is not valid for this token")]
    BadOutcome(String),
}

/// Which of the three generative models a state belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    /// Topic model: per-document topic mixtures.
    Lda,
    /// Author model: per-author word distributions, no topics.
    Author,
    /// Author-topic model: per-author topic mixtures.
    AuthorTopic,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Lda => "lda",
            ModelKind::Author => "author",
            ModelKind::AuthorTopic => "at",
        }
    }

    pub fn has_topics(self) -> bool {
        !matches!(self, ModelKind::Author)
    }

    pub fn has_authors(self) -> bool {
        !matches!(self, ModelKind::Lda)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lda" => Ok(ModelKind::Lda),
            "author" => Ok(ModelKind::Author),
            "at" | "author-topic" => Ok(ModelKind::AuthorTopic),
            other => Err(ModelError::UnknownKind(other.to_string())),
        }
    }
}

/// Symmetric Dirichlet smoothing for topic mixtures (`alpha`) and word
/// distributions (`beta`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperparameters {
    pub alpha: f64,
    pub beta: f64,
}

impl Hyperparameters {
    pub fn new(alpha: f64, beta: f64) -> Result<Self, ModelError> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if ok(alpha) && ok(beta) {
            Ok(Hyperparameters { alpha, beta })
        } else {
            Err(ModelError::BadHyperparameters { alpha, beta })
        }
    }
}

/// `alpha = 50 / T`, `beta = 0.01`.
pub fn default_hyperparameters(topics: usize) -> Result<Hyperparameters, ModelError> {
    if topics == 0 {
        return Err(ModelError::NoTopics);
    }
    Ok(Hyperparameters {
        alpha: 50.0 / topics as f64,
        beta: 0.01,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelConfig {
    pub kind: ModelKind,
    /// Number of topics. Not used by [`ModelKind::Author`].
    pub topics: usize,
    pub hyper: Hyperparameters,
}

impl ModelConfig {
    pub fn new(kind: ModelKind, topics: usize, hyper: Hyperparameters) -> Result<Self, ModelError> {
        if kind.has_topics() && topics == 0 {
            return Err(ModelError::NoTopics);
        }
        Ok(ModelConfig {
            kind,
            topics,
            hyper,
        })
    }

    /// Config with [`default_hyperparameters`]. The author model has no
    /// topics; its (unused) alpha is taken as if `T = 1`.
    pub fn with_defaults(kind: ModelKind, topics: usize) -> Result<Self, ModelError> {
        let hyper = default_hyperparameters(if kind.has_topics() {
            topics
        } else {
            topics.max(1)
        })?;
        ModelConfig::new(kind, topics, hyper)
    }
}

/// A token of the corpus: document index, position within the document, and
/// its word id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TokenRef {
    pub doc: usize,
    pub pos: usize,
    pub word: usize,
}

impl TokenRef {
    pub fn new(corpus: &Corpus, doc: usize, pos: usize) -> Result<Self, ModelError> {
        let word = corpus
            .documents
            .get(doc)
            .and_then(|d| d.tokens.get(pos))
            .copied()
            .ok_or(ModelError::TokenOutOfRange { doc, pos })?;
        Ok(TokenRef { doc, pos, word })
    }
}

/// A latent assignment for one token. `topic` is set for topic kinds,
/// `author` for author kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Outcome {
    pub topic: Option<usize>,
    pub author: Option<usize>,
}

/// Per-token topic (`z`) and author (`x`) assignments, flattened in
/// (document, position) order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssignmentState {
    offsets: Vec<usize>,
    pub(crate) topics: Option<Vec<u32>>,
    pub(crate) authors: Option<Vec<u32>>,
}

impl AssignmentState {
    pub(crate) fn for_corpus(corpus: &Corpus, kind: ModelKind) -> Self {
        let mut offsets = Vec::with_capacity(corpus.num_documents() + 1);
        offsets.push(0);
        for doc in &corpus.documents {
            offsets.push(offsets.last().unwrap() + doc.len());
        }
        let n = *offsets.last().unwrap();
        AssignmentState {
            offsets,
            topics: kind.has_topics().then(|| vec![0; n]),
            authors: kind.has_authors().then(|| vec![0; n]),
        }
    }

    pub fn num_documents(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn num_tokens(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn doc_len(&self, doc: usize) -> usize {
        self.offsets[doc + 1] - self.offsets[doc]
    }

    #[inline]
    pub(crate) fn index(&self, doc: usize, pos: usize) -> usize {
        self.offsets[doc] + pos
    }

    pub fn topic(&self, doc: usize, pos: usize) -> Option<usize> {
        self.topics
            .as_ref()
            .map(|z| z[self.index(doc, pos)] as usize)
    }

    pub fn author(&self, doc: usize, pos: usize) -> Option<usize> {
        self.authors
            .as_ref()
            .map(|x| x[self.index(doc, pos)] as usize)
    }

    pub fn outcome(&self, doc: usize, pos: usize) -> Outcome {
        Outcome {
            topic: self.topic(doc, pos),
            author: self.author(doc, pos),
        }
    }

    pub(crate) fn set(&mut self, doc: usize, pos: usize, outcome: Outcome) {
        let i = self.index(doc, pos);
        if let (Some(z), Some(j)) = (self.topics.as_mut(), outcome.topic) {
            z[i] = j as u32;
        }
        if let (Some(x), Some(k)) = (self.authors.as_mut(), outcome.author) {
            x[i] = k as u32;
        }
    }

    /// Shape check against a corpus; `None` when it fits.
    pub(crate) fn shape_problem(&self, corpus: &Corpus) -> Option<String> {
        if self.num_documents() != corpus.num_documents() {
            return Some(format!(
                "{} documents in assignments, {} in corpus",
                self.num_documents(),
                corpus.num_documents()
            ));
        }
        for (d, doc) in corpus.documents.iter().enumerate() {
            if self.doc_len(d) != doc.len() {
                return Some(format!(
                    "document {d} has {} assigned tokens, corpus has {}",
                    self.doc_len(d),
                    doc.len()
                ));
            }
        }
        None
    }
}

/// Dense integer count matrix with cached row and column totals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountMatrix {
    rows: usize,
    cols: usize,
    cells: Vec<u32>,
    row_totals: Vec<u32>,
    col_totals: Vec<u32>,
}

impl CountMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CountMatrix {
            rows,
            cols,
            cells: vec![0; rows * cols],
            row_totals: vec![0; rows],
            col_totals: vec![0; cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.cells[r * self.cols + c]
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[u32] {
        &self.cells[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> impl Iterator<Item = u32> + '_ {
        (0..self.rows).map(move |r| self.get(r, c))
    }

    #[inline]
    pub fn row_total(&self, r: usize) -> u32 {
        self.row_totals[r]
    }

    #[inline]
    pub fn col_total(&self, c: usize) -> u32 {
        self.col_totals[c]
    }

    pub fn row_totals(&self) -> &[u32] {
        &self.row_totals
    }

    pub fn col_totals(&self) -> &[u32] {
        &self.col_totals
    }

    pub fn total(&self) -> u64 {
        self.cells.iter().map(|&c| c as u64).sum()
    }

    #[inline]
    pub(crate) fn increment(&mut self, r: usize, c: usize) {
        self.cells[r * self.cols + c] += 1;
        self.row_totals[r] += 1;
        self.col_totals[c] += 1;
    }

    #[inline]
    pub(crate) fn decrement(&mut self, r: usize, c: usize) {
        self.cells[r * self.cols + c] -= 1;
        self.row_totals[r] -= 1;
        self.col_totals[c] -= 1;
    }

    /// Appends zero rows (used when folding a new document or word in).
    pub(crate) fn push_zero_rows(&mut self, n: usize) {
        self.cells.extend(std::iter::repeat_n(0, n * self.cols));
        self.row_totals.extend(std::iter::repeat_n(0, n));
        self.rows += n;
    }
}

/// Count tables for one state. Which tables are present depends on the
/// model kind: LDA keeps word-topic and doc-topic, the author-topic model
/// adds author-topic, and the author model keeps only word-author.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTables {
    /// `C_WT`, V x T.
    pub word_topic: Option<CountMatrix>,
    /// `C_DT`, D x T.
    pub doc_topic: Option<CountMatrix>,
    /// `C_AT`, A x T.
    pub author_topic: Option<CountMatrix>,
    /// `C_WA`, V x A.
    pub word_author: Option<CountMatrix>,
}

impl CountTables {
    pub fn zeros(kind: ModelKind, v: usize, t: usize, a: usize, d: usize) -> Self {
        let topics = kind.has_topics();
        CountTables {
            word_topic: topics.then(|| CountMatrix::zeros(v, t)),
            doc_topic: topics.then(|| CountMatrix::zeros(d, t)),
            author_topic: (kind == ModelKind::AuthorTopic).then(|| CountMatrix::zeros(a, t)),
            word_author: (kind == ModelKind::Author).then(|| CountMatrix::zeros(v, a)),
        }
    }

    #[inline]
    pub(crate) fn add(&mut self, doc: usize, word: usize, outcome: Outcome) {
        if let Some(j) = outcome.topic {
            if let Some(m) = self.word_topic.as_mut() {
                m.increment(word, j);
            }
            if let Some(m) = self.doc_topic.as_mut() {
                m.increment(doc, j);
            }
            if let (Some(m), Some(k)) = (self.author_topic.as_mut(), outcome.author) {
                m.increment(k, j);
            }
        }
        if let (Some(m), Some(k)) = (self.word_author.as_mut(), outcome.author) {
            m.increment(word, k);
        }
    }

    #[inline]
    pub(crate) fn remove(&mut self, doc: usize, word: usize, outcome: Outcome) {
        if let Some(j) = outcome.topic {
            if let Some(m) = self.word_topic.as_mut() {
                m.decrement(word, j);
            }
            if let Some(m) = self.doc_topic.as_mut() {
                m.decrement(doc, j);
            }
            if let (Some(m), Some(k)) = (self.author_topic.as_mut(), outcome.author) {
                m.decrement(k, j);
            }
        }
        if let (Some(m), Some(k)) = (self.word_author.as_mut(), outcome.author) {
            m.decrement(word, k);
        }
    }

    fn tables(&self) -> [(&'static str, Option<&CountMatrix>); 4] {
        [
            ("word_topic", self.word_topic.as_ref()),
            ("doc_topic", self.doc_topic.as_ref()),
            ("author_topic", self.author_topic.as_ref()),
            ("word_author", self.word_author.as_ref()),
        ]
    }
}

/// Counts recomputed from scratch by visiting every token. This is the
/// reference the incrementally maintained tables are checked against.
pub fn rebuild_counts(
    corpus: &Corpus,
    assignments: &AssignmentState,
    config: &ModelConfig,
) -> Result<CountTables, ModelError> {
    if let Some(problem) = assignments.shape_problem(corpus) {
        return Err(ModelError::ShapeMismatch(problem));
    }
    let (v, t, a) = (corpus.vocab_size(), config.topics, corpus.num_authors());
    let mut counts = CountTables::zeros(config.kind, v, t, a, corpus.num_documents());
    for (d, doc) in corpus.documents.iter().enumerate() {
        for (p, &w) in doc.tokens.iter().enumerate() {
            let outcome = assignments.outcome(d, p);
            if outcome.topic.is_some_and(|j| j >= t) {
                return Err(ModelError::BadOutcome(format!(
                    "topic {:?} at ({d}, {p})",
                    outcome.topic
                )));
            }
            if outcome.author.is_some_and(|k| k >= a) {
                return Err(ModelError::BadOutcome(format!(
                    "author {:?} at ({d}, {p})",
                    outcome.author
                )));
            }
            counts.add(d, w, outcome);
        }
    }
    Ok(counts)
}

/// Complete state of one Gibbs chain.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplerState {
    pub(crate) config: ModelConfig,
    pub(crate) vocab_size: usize,
    pub(crate) num_authors: usize,
    pub(crate) assignments: AssignmentState,
    pub(crate) counts: CountTables,
    pub(crate) iteration: u64,
    pub(crate) seed: u64,
    /// Token currently removed from the counts, awaiting a new assignment.
    pub(crate) detached: Option<TokenRef>,
}

/// Random initial state: each token gets a topic uniform over `[0, T)` and
/// an author uniform over its document's authors. Deterministic in `seed`.
pub fn init_assignments(
    corpus: &Corpus,
    config: ModelConfig,
    seed: u64,
) -> Result<SamplerState, ModelError> {
    let mut rng = ChainRng::seed_from_u64(seed);
    SamplerState::initialize(corpus, config, seed, &mut rng)
}

impl SamplerState {
    /// Draws the initial assignments from `rng`. One uniform variate per token
    /// selects an outcome from the same canonical support the sampler uses
    /// (topics ascending, then authors ascending).
    pub(crate) fn initialize(
        corpus: &Corpus,
        config: ModelConfig,
        seed: u64,
        rng: &mut ChainRng,
    ) -> Result<Self, ModelError> {
        if corpus.total_tokens() == 0 {
            return Err(ModelError::EmptyCorpus);
        }
        let t = config.topics;
        let mut assignments = AssignmentState::for_corpus(corpus, config.kind);
        let mut counts = CountTables::zeros(
            config.kind,
            corpus.vocab_size(),
            t,
            corpus.num_authors(),
            corpus.num_documents(),
        );
        for (d, doc) in corpus.documents.iter().enumerate() {
            let mut authors = doc.authors.clone();
            authors.sort_unstable();
            let ad = authors.len();
            let support = match config.kind {
                ModelKind::Lda => t,
                ModelKind::Author => ad,
                ModelKind::AuthorTopic => t * ad,
            };
            for (p, &w) in doc.tokens.iter().enumerate() {
                let idx = ((uniform(rng) * support as f64) as usize).min(support - 1);
                let outcome = match config.kind {
                    ModelKind::Lda => Outcome {
                        topic: Some(idx),
                        author: None,
                    },
                    ModelKind::Author => Outcome {
                        topic: None,
                        author: Some(authors[idx]),
                    },
                    ModelKind::AuthorTopic => Outcome {
                        topic: Some(idx / ad),
                        author: Some(authors[idx % ad]),
                    },
                };
                assignments.set(d, p, outcome);
                counts.add(d, w, outcome);
            }
        }
        Ok(SamplerState {
            config,
            vocab_size: corpus.vocab_size(),
            num_authors: corpus.num_authors(),
            assignments,
            counts,
            iteration: 0,
            seed,
            detached: None,
        })
    }

    /// Builds a state from given assignments, rebuilding the counts.
    pub fn from_assignments(
        corpus: &Corpus,
        config: ModelConfig,
        assignments: AssignmentState,
        iteration: u64,
        seed: u64,
    ) -> Result<Self, ModelError> {
        let counts = rebuild_counts(corpus, &assignments, &config)?;
        Ok(SamplerState {
            config,
            vocab_size: corpus.vocab_size(),
            num_authors: corpus.num_authors(),
            assignments,
            counts,
            iteration,
            seed,
            detached: None,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn kind(&self) -> ModelKind {
        self.config.kind
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn num_authors(&self) -> usize {
        self.num_authors
    }

    pub fn num_topics(&self) -> usize {
        self.config.topics
    }

    pub fn num_documents(&self) -> usize {
        self.assignments.num_documents()
    }

    pub fn assignments(&self) -> &AssignmentState {
        &self.assignments
    }

    pub fn counts(&self) -> &CountTables {
        &self.counts
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn detached(&self) -> Option<TokenRef> {
        self.detached
    }

    /// Removes a token's current assignment from the counts so that its
    /// conditional can be evaluated. At most one token may be removed at a time.
    pub fn remove_token(&mut self, token: TokenRef) -> Result<(), ModelError> {
        if token.doc >= self.num_documents() || token.pos >= self.assignments.doc_len(token.doc) {
            return Err(ModelError::TokenOutOfRange {
                doc: token.doc,
                pos: token.pos,
            });
        }
        if let Some(t) = self.detached {
            return Err(ModelError::BadOutcome(format!(
                "token ({}, {}) is already removed",
                t.doc, t.pos
            )));
        }
        let outcome = self.assignments.outcome(token.doc, token.pos);
        self.counts.remove(token.doc, token.word, outcome);
        self.detached = Some(token);
        Ok(())
    }

    /// Gives the removed token a new assignment and adds it back to the counts.
    pub fn assign_token(&mut self, token: TokenRef, outcome: Outcome) -> Result<(), ModelError> {
        if self.detached != Some(token) {
            return Err(ModelError::NotDecremented {
                doc: token.doc,
                pos: token.pos,
            });
        }
        let kind = self.kind();
        let topic_ok = match outcome.topic {
            Some(j) => kind.has_topics() && j < self.config.topics,
            None => !kind.has_topics(),
        };
        let author_ok = match outcome.author {
            Some(k) => kind.has_authors() && k < self.num_authors,
            None => !kind.has_authors(),
        };
        if !(topic_ok && author_ok) {
            return Err(ModelError::BadOutcome(format!("{outcome:?}")));
        }
        self.assignments.set(token.doc, token.pos, outcome);
        self.counts.add(token.doc, token.word, outcome);
        self.detached = None;
        Ok(())
    }

    /// Point estimates for this state's model kind.
    pub fn estimates(&self) -> EstimateMatrices {
        EstimateMatrices::from_counts(&self.counts, self.config.hyper)
    }
}

/// A broken invariant found by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    ShapeMismatch(String),
    MissingAssignments(&'static str),
    TopicOutOfRange {
        doc: usize,
        pos: usize,
        topic: usize,
    },
    AuthorNotOnDocument {
        doc: usize,
        pos: usize,
        author: usize,
    },
    TokenDetached {
        doc: usize,
        pos: usize,
    },
    MissingTable(&'static str),
    CountMismatch {
        table: &'static str,
        row: usize,
        col: usize,
        expected: u32,
        found: u32,
    },
    RowTotalMismatch {
        table: &'static str,
        row: usize,
        expected: u32,
        found: u32,
    },
    ColumnTotalMismatch {
        table: &'static str,
        col: usize,
        expected: u32,
        found: u32,
    },
}

/// Checks every assignment and count invariant of `state` against `corpus`.
/// Returns an empty list when the state is consistent.
pub fn validate(state: &SamplerState, corpus: &Corpus) -> Vec<Violation> {
    let mut out = Vec::new();
    let asg = &state.assignments;
    if let Some(problem) = asg.shape_problem(corpus) {
        out.push(Violation::ShapeMismatch(problem));
        return out;
    }
    if state.vocab_size != corpus.vocab_size() || state.num_authors != corpus.num_authors() {
        out.push(Violation::ShapeMismatch(format!(
            "state has V={} A={}, corpus has V={} A={}",
            state.vocab_size,
            state.num_authors,
            corpus.vocab_size(),
            corpus.num_authors()
        )));
        return out;
    }
    let kind = state.kind();
    if kind.has_topics() != asg.topics.is_some() {
        out.push(Violation::MissingAssignments("topic"));
    }
    if kind.has_authors() != asg.authors.is_some() {
        out.push(Violation::MissingAssignments("author"));
    }
    if let Some(t) = state.detached {
        out.push(Violation::TokenDetached {
            doc: t.doc,
            pos: t.pos,
        });
    }
    let mut assignments_ok = out.is_empty();
    for (d, doc) in corpus.documents.iter().enumerate() {
        for p in 0..doc.len() {
            if let Some(j) = asg.topic(d, p) {
                if j >= state.config.topics {
                    out.push(Violation::TopicOutOfRange {
                        doc: d,
                        pos: p,
                        topic: j,
                    });
                    assignments_ok = false;
                }
            }
            if let Some(k) = asg.author(d, p) {
                if !doc.authors.contains(&k) {
                    out.push(Violation::AuthorNotOnDocument {
                        doc: d,
                        pos: p,
                        author: k,
                    });
                    assignments_ok = false;
                }
            }
        }
    }
    if !assignments_ok {
        return out;
    }
    let rebuilt = match rebuild_counts(corpus, asg, &state.config) {
        Ok(c) => c,
        Err(e) => {
            out.push(Violation::ShapeMismatch(e.to_string()));
            return out;
        }
    };
    for ((name, have), (_, want)) in state.counts.tables().into_iter().zip(rebuilt.tables()) {
        match (have, want) {
            (Some(have), Some(want)) => compare_tables(name, have, want, &mut out),
            (None, None) => {}
            _ => out.push(Violation::MissingTable(name)),
        }
    }
    out
}

fn compare_tables(
    table: &'static str,
    have: &CountMatrix,
    want: &CountMatrix,
    out: &mut Vec<Violation>,
) {
    if have.rows != want.rows || have.cols != want.cols {
        out.push(Violation::ShapeMismatch(format!(
            "{table} is {}x{}, expected {}x{}",
            have.rows, have.cols, want.rows, want.cols
        )));
        return;
    }
    for r in 0..want.rows {
        for c in 0..want.cols {
            let (expected, found) = (want.get(r, c), have.get(r, c));
            if expected != found {
                out.push(Violation::CountMismatch {
                    table,
                    row: r,
                    col: c,
                    expected,
                    found,
                });
            }
        }
    }
    for (row, (&expected, &found)) in want.row_totals.iter().zip(&have.row_totals).enumerate() {
        if expected != found {
            out.push(Violation::RowTotalMismatch {
                table,
                row,
                expected,
                found,
            });
        }
    }
    for (col, (&expected, &found)) in want.col_totals.iter().zip(&have.col_totals).enumerate() {
        if expected != found {
            out.push(Violation::ColumnTotalMismatch {
                table,
                col,
                expected,
                found,
            });
        }
    }
}

/// Smoothed point estimates. Only the matrices of the state's model kind
/// are present.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateMatrices {
    /// Word given topic, V x T; columns sum to 1.
    pub phi: Option<Array2<f64>>,
    /// Topic given document, D x T; rows sum to 1.
    pub theta_doc: Option<Array2<f64>>,
    /// Topic given author, A x T; rows sum to 1.
    pub theta_author: Option<Array2<f64>>,
    /// Word given author, V x A; columns sum to 1.
    pub phi_author: Option<Array2<f64>>,
}

impl EstimateMatrices {
    pub fn from_counts(counts: &CountTables, hyper: Hyperparameters) -> Self {
        EstimateMatrices {
            phi: counts
                .word_topic
                .as_ref()
                .map(|c| phi_word_topic(c, hyper.beta)),
            theta_doc: counts
                .doc_topic
                .as_ref()
                .map(|c| theta_doc_topic(c, hyper.alpha)),
            theta_author: counts
                .author_topic
                .as_ref()
                .map(|c| theta_author_topic(c, hyper.alpha)),
            phi_author: counts
                .word_author
                .as_ref()
                .map(|c| phi_word_author(c, hyper.beta)),
        }
    }
}

fn column_smoothed(counts: &CountMatrix, prior: f64) -> Array2<f64> {
    let denom: Vec<f64> = counts
        .col_totals
        .iter()
        .map(|&n| n as f64 + counts.rows as f64 * prior)
        .collect();
    Array2::from_shape_fn((counts.rows, counts.cols), |(r, c)| {
        (counts.get(r, c) as f64 + prior) / denom[c]
    })
}

fn row_smoothed(counts: &CountMatrix, prior: f64) -> Array2<f64> {
    let denom: Vec<f64> = counts
        .row_totals
        .iter()
        .map(|&n| n as f64 + counts.cols as f64 * prior)
        .collect();
    Array2::from_shape_fn((counts.rows, counts.cols), |(r, c)| {
        (counts.get(r, c) as f64 + prior) / denom[r]
    })
}

/// `phi[m][j] = (C_WT[m][j] + beta) / (sum_m' C_WT[m'][j] + V beta)`.
pub fn phi_word_topic(word_topic: &CountMatrix, beta: f64) -> Array2<f64> {
    column_smoothed(word_topic, beta)
}

/// `theta[d][j] = (C_DT[d][j] + alpha) / (N_d + T alpha)`.
pub fn theta_doc_topic(doc_topic: &CountMatrix, alpha: f64) -> Array2<f64> {
    row_smoothed(doc_topic, alpha)
}

/// `theta[k][j] = (C_AT[k][j] + alpha) / (sum_j' C_AT[k][j'] + T alpha)`.
pub fn theta_author_topic(author_topic: &CountMatrix, alpha: f64) -> Array2<f64> {
    row_smoothed(author_topic, alpha)
}

/// `phi[m][k] = (C_WA[m][k] + beta) / (sum_m' C_WA[m'][k] + V beta)`.
pub fn phi_word_author(word_author: &CountMatrix, beta: f64) -> Array2<f64> {
    column_smoothed(word_author, beta)
}
