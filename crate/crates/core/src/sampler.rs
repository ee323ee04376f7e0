//! Collapsed Gibbs conditionals for the three model kinds and the sweep that
//! applies them to every token.
//!
//! The support of each conditional is enumerated in a fixed order: topics
//! ascending for LDA, the document's authors ascending for the author model,
//! and `(topic, author)` pairs with the topic varying slowest for the
//! author-topic model. A draw takes one uniform variate and walks the
//! cumulative weights in that order.

use rand::SeedableRng;
use thiserror::Error;

use crate::chains::Sample;
use crate::corpus::Corpus;
use crate::model::{
    validate, CountTables, ModelConfig, ModelError, ModelKind, Outcome, SamplerState, TokenRef,
    Violation,
};
use crate::rng::{draw_from_cumulative, uniform, ChainRng};

#[derive(Debug, Error, PartialEq)]
pub enum SamplerError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("token ({doc}, {pos}) must be removed from the counts first")]
    NotDecremented { doc: usize, pos: usize },
    #[error("operation needs a {expected} model, state is {found}")]
    WrongKind {
        expected: &'static str,
        found: ModelKind,
    },
    #[error("snapshot iteration {requested} is past the last iteration {iterations}")]
    InvalidSchedule { requested: u64, iterations: u64 },
    #[error("state is not a sweep boundary: a token is still removed")]
    TokenPending,
    #[error("state failed validation: {0:?}")]
    Invalid(Vec<Violation>),
}

/// Unnormalized conditional weights over a token's candidate assignments.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalWeights {
    pub support: Vec<Outcome>,
    pub weights: Vec<f64>,
}

impl ConditionalWeights {
    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn normalized(&self) -> Vec<f64> {
        let total = self.total();
        self.weights.iter().map(|w| w / total).collect()
    }

    /// Normalized probability of `outcome`, zero when it is outside the support.
    pub fn probability(&self, outcome: Outcome) -> f64 {
        let total = self.total();
        self.support
            .iter()
            .zip(&self.weights)
            .find(|(o, _)| **o == outcome)
            .map_or(0.0, |(_, w)| w / total)
    }
}

/// `(C_WT[m][j] + beta) / (sum_m' C_WT[m'][j] + V beta) * (C_DT[d][j] + alpha) / (N_d + T alpha)`
/// for every topic `j`, with the token itself removed from the counts.
pub fn conditional_lda(
    state: &SamplerState,
    corpus: &Corpus,
    token: TokenRef,
) -> Result<ConditionalWeights, SamplerError> {
    conditional(state, corpus, token, ModelKind::Lda)
}

/// `(C_WA[m][k] + beta) / (sum_m' C_WA[m'][k] + V beta)` for each author `k`
/// of the token's document. The uniform `1/A_d` author factor cancels.
pub fn conditional_author(
    state: &SamplerState,
    corpus: &Corpus,
    token: TokenRef,
) -> Result<ConditionalWeights, SamplerError> {
    conditional(state, corpus, token, ModelKind::Author)
}

/// Blocked `(z, x)` conditional:
/// `(C_WT[m][j] + beta) / (sum_m' C_WT[m'][j] + V beta) * (C_AT[k][j] + alpha) / (sum_j' C_AT[k][j'] + T alpha)`
/// for every topic `j` and author `k` of the document.
pub fn conditional_author_topic(
    state: &SamplerState,
    corpus: &Corpus,
    token: TokenRef,
) -> Result<ConditionalWeights, SamplerError> {
    conditional(state, corpus, token, ModelKind::AuthorTopic)
}

fn conditional(
    state: &SamplerState,
    corpus: &Corpus,
    token: TokenRef,
    kind: ModelKind,
) -> Result<ConditionalWeights, SamplerError> {
    if state.kind() != kind {
        return Err(SamplerError::WrongKind {
            expected: kind.as_str(),
            found: state.kind(),
        });
    }
    if state.detached() != Some(token) {
        return Err(SamplerError::NotDecremented {
            doc: token.doc,
            pos: token.pos,
        });
    }
    let authors = sorted_authors(&corpus.documents[token.doc].authors);
    let mut kernel = Kernel::new(state.config(), state.vocab_size(), authors.len());
    kernel.fill(state.counts(), token.doc, token.word, &authors);
    let n = kernel.support_len(authors.len());
    Ok(ConditionalWeights {
        support: (0..n).map(|i| kernel.decode(i, &authors)).collect(),
        weights: kernel.buf[..n].to_vec(),
    })
}

pub(crate) fn sorted_authors(authors: &[usize]) -> Vec<usize> {
    let mut a = authors.to_vec();
    a.sort_unstable();
    a
}

/// Weight evaluation and draws for one model configuration, with a reusable
/// buffer.
pub(crate) struct Kernel {
    kind: ModelKind,
    topics: usize,
    alpha: f64,
    beta: f64,
    v_beta: f64,
    t_alpha: f64,
    buf: Vec<f64>,
    word_ratio: Vec<f64>,
}

impl Kernel {
    pub(crate) fn new(config: &ModelConfig, vocab_size: usize, max_authors: usize) -> Self {
        let topics = config.topics;
        let mut k = Kernel {
            kind: config.kind,
            topics,
            alpha: config.hyper.alpha,
            beta: config.hyper.beta,
            v_beta: vocab_size as f64 * config.hyper.beta,
            t_alpha: topics as f64 * config.hyper.alpha,
            buf: Vec::new(),
            word_ratio: vec![0.0; topics],
        };
        k.reserve(max_authors);
        k
    }

    fn reserve(&mut self, authors: usize) {
        let n = self.support_len(authors.max(1));
        if self.buf.len() < n {
            self.buf.resize(n, 0.0);
        }
    }

    fn support_len(&self, authors: usize) -> usize {
        match self.kind {
            ModelKind::Lda => self.topics,
            ModelKind::Author => authors,
            ModelKind::AuthorTopic => self.topics * authors,
        }
    }

    #[inline]
    fn decode(&self, idx: usize, authors: &[usize]) -> Outcome {
        match self.kind {
            ModelKind::Lda => Outcome {
                topic: Some(idx),
                author: None,
            },
            ModelKind::Author => Outcome {
                topic: None,
                author: Some(authors[idx]),
            },
            ModelKind::AuthorTopic => {
                let ad = authors.len();
                Outcome {
                    topic: Some(idx / ad),
                    author: Some(authors[idx % ad]),
                }
            }
        }
    }

    /// Writes the unnormalized weights into `self.buf[..support_len]`.
    #[inline]
    fn fill(&mut self, counts: &CountTables, doc: usize, word: usize, authors: &[usize]) {
        self.reserve(authors.len());
        let (alpha, beta, v_beta, t_alpha) = (self.alpha, self.beta, self.v_beta, self.t_alpha);
        match self.kind {
            ModelKind::Lda => {
                let wt = counts.word_topic.as_ref().expect("lda state has C_WT");
                let dt = counts.doc_topic.as_ref().expect("lda state has C_DT");
                let wrow = wt.row(word);
                let wtot = wt.col_totals();
                let drow = dt.row(doc);
                let dden = dt.row_total(doc) as f64 + t_alpha;
                let out = &mut self.buf[..self.topics];
                for j in 0..out.len() {
                    out[j] = (wrow[j] as f64 + beta) / (wtot[j] as f64 + v_beta)
                        * ((drow[j] as f64 + alpha) / dden);
                }
            }
            ModelKind::Author => {
                let wa = counts.word_author.as_ref().expect("author state has C_WA");
                let wrow = wa.row(word);
                for (i, &k) in authors.iter().enumerate() {
                    self.buf[i] = (wrow[k] as f64 + beta) / (wa.col_total(k) as f64 + v_beta);
                }
            }
            ModelKind::AuthorTopic => {
                let wt = counts
                    .word_topic
                    .as_ref()
                    .expect("author-topic state has C_WT");
                let at = counts
                    .author_topic
                    .as_ref()
                    .expect("author-topic state has C_AT");
                let wrow = wt.row(word);
                let wtot = wt.col_totals();
                for j in 0..self.topics {
                    self.word_ratio[j] = (wrow[j] as f64 + beta) / (wtot[j] as f64 + v_beta);
                }
                let ad = authors.len();
                for (i, &k) in authors.iter().enumerate() {
                    let arow = at.row(k);
                    let aden = at.row_total(k) as f64 + t_alpha;
                    for (j, (&ratio, &c)) in self.word_ratio.iter().zip(arow).enumerate() {
                        self.buf[j * ad + i] = ratio * ((c as f64 + alpha) / aden);
                    }
                }
            }
        }
    }

    /// Removes the token's `current` assignment from `counts`, draws a new
    /// one from the conditional and adds it back.
    #[inline]
    pub(crate) fn resample(
        &mut self,
        counts: &mut CountTables,
        doc: usize,
        word: usize,
        authors: &[usize],
        current: Outcome,
        rng: &mut ChainRng,
    ) -> Outcome {
        counts.remove(doc, word, current);
        self.fill(counts, doc, word, authors);
        let n = self.support_len(authors.len());
        let cum = &mut self.buf[..n];
        let mut acc = 0.0;
        for w in cum.iter_mut() {
            acc += *w;
            *w = acc;
        }
        let idx = draw_from_cumulative(cum, uniform(rng));
        let next = self.decode(idx, authors);
        counts.add(doc, word, next);
        next
    }
}

/// One Gibbs sweep: every token in (document, position) order is removed
/// from the counts, redrawn from its conditional and added back.
/// Empty documents are skipped.
pub fn sweep(
    state: &mut SamplerState,
    corpus: &Corpus,
    rng: &mut ChainRng,
) -> Result<(), SamplerError> {
    if state.detached.is_some() {
        return Err(SamplerError::TokenPending);
    }
    if let Some(problem) = state.assignments.shape_problem(corpus) {
        return Err(ModelError::ShapeMismatch(problem).into());
    }
    let max_authors = corpus
        .documents
        .iter()
        .map(|d| d.authors.len())
        .max()
        .unwrap_or(1);
    let mut kernel = Kernel::new(&state.config, state.vocab_size, max_authors);
    let mut authors = Vec::with_capacity(max_authors);
    for (d, doc) in corpus.documents.iter().enumerate() {
        if doc.is_empty() {
            continue;
        }
        authors.clear();
        authors.extend_from_slice(&doc.authors);
        authors.sort_unstable();
        for (p, &w) in doc.tokens.iter().enumerate() {
            let current = state.assignments.outcome(d, p);
            let next = kernel.resample(&mut state.counts, d, w, &authors, current, rng);
            state.assignments.set(d, p, next);
        }
    }
    state.iteration += 1;
    if cfg!(debug_assertions) {
        check(state, corpus)?;
    }
    Ok(())
}

fn check(state: &SamplerState, corpus: &Corpus) -> Result<(), SamplerError> {
    let violations = validate(state, corpus);
    if violations.is_empty() {
        Ok(())
    } else {
        Err(SamplerError::Invalid(violations))
    }
}

/// Runs one chain: random initialization from `seed`, then `iterations`
/// sweeps, capturing a [`Sample`] after each iteration listed in
/// `snapshot_at` (0 is the initial state).
pub fn run_chain(
    corpus: &Corpus,
    config: ModelConfig,
    seed: u64,
    iterations: u64,
    snapshot_at: &[u64],
) -> Result<Vec<Sample>, SamplerError> {
    run_chain_with_progress(corpus, config, seed, iterations, snapshot_at, |_| {})
}

/// [`run_chain`] calling `progress(iteration)` after every sweep.
pub fn run_chain_with_progress<F: FnMut(u64)>(
    corpus: &Corpus,
    config: ModelConfig,
    seed: u64,
    iterations: u64,
    snapshot_at: &[u64],
    mut progress: F,
) -> Result<Vec<Sample>, SamplerError> {
    if let Some(&requested) = snapshot_at.iter().find(|&&s| s > iterations) {
        return Err(SamplerError::InvalidSchedule {
            requested,
            iterations,
        });
    }
    let mut wanted = snapshot_at.to_vec();
    wanted.sort_unstable();
    wanted.dedup();

    let mut rng = ChainRng::seed_from_u64(seed);
    let mut state = SamplerState::initialize(corpus, config, seed, &mut rng)?;
    let mut samples = Vec::with_capacity(wanted.len());
    let mut next = wanted.iter().peekable();
    loop {
        if next.peek() == Some(&&state.iteration) {
            next.next();
            check(&state, corpus)?;
            samples.push(Sample::new(state.clone()));
        }
        if state.iteration == iterations {
            break;
        }
        sweep(&mut state, corpus, &mut rng)?;
        progress(state.iteration);
    }
    Ok(samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::corpus;
    use crate::model::{init_assignments, AssignmentState, Hyperparameters};

    fn state_with(
        c: &Corpus,
        kind: ModelKind,
        t: usize,
        alpha: f64,
        beta: f64,
        z: &[usize],
        x: &[usize],
    ) -> SamplerState {
        let cfg = ModelConfig::new(kind, t, Hyperparameters::new(alpha, beta).unwrap()).unwrap();
        let mut asg = AssignmentState::for_corpus(c, kind);
        let mut i = 0;
        for (d, doc) in c.documents.iter().enumerate() {
            for p in 0..doc.len() {
                asg.set(
                    d,
                    p,
                    Outcome {
                        topic: z.get(i).copied(),
                        author: x.get(i).copied(),
                    },
                );
                i += 1;
            }
        }
        SamplerState::from_assignments(c, cfg, asg, 0, 0).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn lda_hand_example() {
        // C_WT = [[2,0],[0,1]] and C_DT row (2,1) once the last token is removed
        let c = corpus(2, 1, vec![(vec![0], vec![0, 0, 1, 0])]);
        let mut s = state_with(&c, ModelKind::Lda, 2, 1.0, 1.0, &[0, 0, 1, 1], &[]);
        let t = TokenRef::new(&c, 0, 3).unwrap();
        assert_eq!(
            conditional_lda(&s, &c, t),
            Err(SamplerError::NotDecremented { doc: 0, pos: 3 })
        );
        s.remove_token(t).unwrap();
        let w = conditional_lda(&s, &c, t).unwrap();
        assert!(close(&w.weights, &[0.75 * 0.6, (1.0 / 3.0) * 0.4], 1e-15));
        let p = w.normalized();
        assert!((p[0] - 0.45 / (0.45 + 0.4 / 3.0)).abs() < 1e-15);
        assert!((p[0] - 0.7714).abs() < 1e-4 && (p[1] - 0.2286).abs() < 1e-4);

        assert!(matches!(
            conditional_author(&s, &c, t),
            Err(SamplerError::WrongKind { .. })
        ));
    }

    #[test]
    fn author_topic_single_author_matches_lda_example() {
        let c = corpus(2, 1, vec![(vec![0], vec![0, 0, 1, 0])]);
        let mut s = state_with(
            &c,
            ModelKind::AuthorTopic,
            2,
            1.0,
            1.0,
            &[0, 0, 1, 1],
            &[0, 0, 0, 0],
        );
        let t = TokenRef::new(&c, 0, 3).unwrap();
        s.remove_token(t).unwrap();
        let w = conditional_author_topic(&s, &c, t).unwrap();
        assert!(close(&w.weights, &[0.75 * 0.6, (1.0 / 3.0) * 0.4], 1e-15));
        assert_eq!(
            w.support[1],
            Outcome {
                topic: Some(1),
                author: Some(0)
            }
        );
    }

    #[test]
    fn author_hand_example() {
        let c = corpus(
            2,
            2,
            vec![(vec![0], vec![0, 0, 0, 1]), (vec![1, 0], vec![0])],
        );
        let mut s = state_with(&c, ModelKind::Author, 0, 1.0, 1.0, &[], &[0, 0, 0, 0, 1]);
        let t = TokenRef::new(&c, 1, 0).unwrap();
        s.remove_token(t).unwrap();
        let w = conditional_author(&s, &c, t).unwrap();
        assert_eq!(
            w.support
                .iter()
                .map(|o| o.author.unwrap())
                .collect::<Vec<_>>(),
            vec![0, 1]
        );
        assert!(close(&w.weights, &[4.0 / 6.0, 0.5], 1e-15));
        assert!(close(&w.normalized(), &[4.0 / 7.0, 3.0 / 7.0], 1e-15));
    }

    #[test]
    fn symmetric_cases_are_uniform() {
        let c = corpus(3, 2, vec![(vec![0, 1], vec![2])]);
        for (kind, t, expected) in [
            (ModelKind::Lda, 3, vec![1.0 / 3.0; 3]),
            (ModelKind::Author, 0, vec![0.5; 2]),
            (ModelKind::AuthorTopic, 2, vec![0.25; 4]),
        ] {
            let cfg = ModelConfig::with_defaults(kind, t).unwrap();
            let mut s = init_assignments(&c, cfg, 1).unwrap();
            let tok = TokenRef::new(&c, 0, 0).unwrap();
            s.remove_token(tok).unwrap();
            let w = conditional(&s, &c, tok, kind).unwrap();
            assert!(close(&w.normalized(), &expected, 1e-15), "{kind}");
        }

        let solo = corpus(3, 2, vec![(vec![1], vec![2, 0])]);
        let cfg = ModelConfig::with_defaults(ModelKind::Author, 0).unwrap();
        let mut s = init_assignments(&solo, cfg, 1).unwrap();
        let tok = TokenRef::new(&solo, 0, 1).unwrap();
        s.remove_token(tok).unwrap();
        let w = conditional_author(&s, &solo, tok).unwrap();
        assert_eq!(w.normalized(), vec![1.0]);
    }

    #[test]
    fn author_word_factor_equals_author_topic_word_factor() {
        // With one topic per author (topic k <-> author k) the author-topic
        // word ratio over C_WT is the author model's ratio over C_WA.
        let c = corpus(
            3,
            2,
            vec![(vec![0, 1], vec![0, 1, 2, 2, 1]), (vec![1], vec![2, 0])],
        );
        let x = [0, 1, 1, 0, 1, 1, 1];
        let author = state_with(&c, ModelKind::Author, 0, 1.0, 0.3, &[], &x);
        let at = state_with(&c, ModelKind::AuthorTopic, 2, 1.0, 0.3, &x, &x);
        let wa = author.counts().word_author.as_ref().unwrap();
        let wt = at.counts().word_topic.as_ref().unwrap();
        assert_eq!(wa, wt);
        let mut ka = Kernel::new(author.config(), 3, 2);
        let mut kt = Kernel::new(at.config(), 3, 2);
        for m in 0..3 {
            ka.fill(author.counts(), 0, m, &[0, 1]);
            kt.fill(at.counts(), 0, m, &[0, 1]);
            assert_eq!(&ka.buf[..2], &kt.word_ratio[..2]);
        }
    }

    #[test]
    fn single_outcome_sweep_is_identity() {
        let c = corpus(1, 1, vec![(vec![0], vec![0])]);
        let cfg = ModelConfig::with_defaults(ModelKind::AuthorTopic, 1).unwrap();
        let mut s = init_assignments(&c, cfg, 1).unwrap();
        let before = s.clone();
        let mut rng = ChainRng::seed_from_u64(3);
        sweep(&mut s, &c, &mut rng).unwrap();
        assert_eq!(s.assignments(), before.assignments());
        assert_eq!(s.counts(), before.counts());
        assert_eq!(s.iteration(), 1);
    }

    #[test]
    fn sweeps_are_deterministic_and_valid() {
        let c = corpus(
            5,
            3,
            vec![
                (vec![0, 2], vec![0, 1, 2, 3, 4, 4]),
                (vec![1], vec![]),
                (vec![1, 0], vec![3, 3, 1]),
            ],
        );
        for kind in [ModelKind::Lda, ModelKind::Author, ModelKind::AuthorTopic] {
            let cfg = ModelConfig::with_defaults(kind, 3).unwrap();
            let s = init_assignments(&c, cfg, 9).unwrap();
            let (mut a, mut b) = (s.clone(), s);
            let (mut ra, mut rb) = (ChainRng::seed_from_u64(1), ChainRng::seed_from_u64(1));
            for _ in 0..20 {
                sweep(&mut a, &c, &mut ra).unwrap();
                sweep(&mut b, &c, &mut rb).unwrap();
                assert!(validate(&a, &c).is_empty());
            }
            assert_eq!(a, b);
        }
    }

    #[test]
    fn run_chain_schedule() {
        let c = corpus(3, 1, vec![(vec![0], vec![0, 1, 2, 1])]);
        let cfg = ModelConfig::with_defaults(ModelKind::Lda, 2).unwrap();
        let s0 = run_chain(&c, cfg, 4, 5, &[0]).unwrap();
        assert_eq!(s0.len(), 1);
        assert_eq!(s0[0].state(), &init_assignments(&c, cfg, 4).unwrap());
        let s = run_chain(&c, cfg, 4, 5, &[5, 2]).unwrap();
        assert_eq!(
            s.iter().map(|s| s.state().iteration()).collect::<Vec<_>>(),
            vec![2, 5]
        );
        assert_eq!(
            run_chain(&c, cfg, 4, 5, &[6]).unwrap_err(),
            SamplerError::InvalidSchedule {
                requested: 6,
                iterations: 5
            }
        );
        let empty = corpus(3, 1, vec![(vec![0], vec![])]);
        assert_eq!(
            run_chain(&empty, cfg, 4, 5, &[5]).unwrap_err(),
            SamplerError::Model(ModelError::EmptyCorpus)
        );
    }
}
