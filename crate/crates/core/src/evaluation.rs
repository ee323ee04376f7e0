//! Held-out likelihood, perplexity, fold-in and author ranking.
//!
//! The probability of a document's words under one sample is
//!
//! ```text
//! prod_m  (1/A_d) sum_{k in a_d} sum_j theta[k][j] phi[w_m][j]
//! ```
//!
//! with the point estimates of that sample. Samples are combined on the
//! probability scale (the mean of per-sample likelihoods, computed with
//! log-sum-exp), and perplexity is `exp(-ln p / N)`.
//!
//! The same formula covers the other kinds: LDA replaces the author mixture
//! with the document's own topic mixture (or the flat prior mixture when no
//! words of the document have been folded in), and the author model uses
//! `(1/A_d) sum_k phi_author[w][k]`.

use ndarray::Array2;
use rand::SeedableRng;
use rayon::prelude::*;
use thiserror::Error;

use crate::chains::{Sample, SampleSet};
use crate::corpus::{split_document_foldin, CorpusError, Document};
use crate::model::{CountTables, EstimateMatrices, ModelConfig, ModelKind, Outcome};
use crate::rng::{derive_seed, uniform, ChainRng};
use crate::sampler::{sorted_authors, Kernel};

/// Default number of Gibbs sweeps over folded-in tokens.
pub const DEFAULT_FOLDIN_SWEEPS: usize = 20;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("author id {0} is not known to the model")]
    UnknownAuthor(usize),
    #[error("word id {0} is not in the model vocabulary")]
    UnknownWord(usize),
    #[error("document has no authors")]
    EmptyAuthorSet,
    #[error("document has no tokens to evaluate")]
    EmptyDocument,
    #[error("token position {0} is outside the document")]
    PositionOutOfRange(usize),
    #[error("operation needs an author-aware model, samples are {0}")]
    WrongKind(ModelKind),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

/// Per-word predictive probabilities under one sample, evaluated straight
/// from its counts.
struct Predictive<'a> {
    config: &'a ModelConfig,
    vocab_size: usize,
    counts: &'a CountTables,
    /// Row of `C_DT` holding a folded-in document (LDA).
    doc_row: Option<usize>,
}

impl Predictive<'_> {
    /// Topic mixture of the document: the mean of its authors' `theta` rows
    /// (author-topic) or its own `theta` row (LDA).
    fn topic_mixture(&self, authors: &[usize]) -> Vec<f64> {
        let t = self.config.topics;
        let alpha = self.config.hyper.alpha;
        let t_alpha = t as f64 * alpha;
        let mut mix = vec![0.0; t];
        match self.config.kind {
            ModelKind::Lda => match self.doc_row {
                Some(d) => {
                    let dt = self.counts.doc_topic.as_ref().expect("lda counts");
                    let den = dt.row_total(d) as f64 + t_alpha;
                    for (j, m) in mix.iter_mut().enumerate() {
                        *m = (dt.get(d, j) as f64 + alpha) / den;
                    }
                }
                None => mix.fill(alpha / t_alpha),
            },
            ModelKind::AuthorTopic => {
                let at = self
                    .counts
                    .author_topic
                    .as_ref()
                    .expect("author-topic counts");
                let share = 1.0 / authors.len() as f64;
                for &k in authors {
                    let den = at.row_total(k) as f64 + t_alpha;
                    for (j, m) in mix.iter_mut().enumerate() {
                        *m += share * (at.get(k, j) as f64 + alpha) / den;
                    }
                }
            }
            ModelKind::Author => unreachable!("author model has no topics"),
        }
        mix
    }

    /// `sum_m ln p(w_m)` over `tokens`.
    fn log_likelihood(&self, tokens: &[usize], authors: &[usize]) -> f64 {
        let beta = self.config.hyper.beta;
        let v_beta = self.vocab_size as f64 * beta;
        match self.config.kind {
            ModelKind::Author => {
                let wa = self.counts.word_author.as_ref().expect("author counts");
                let share = 1.0 / authors.len() as f64;
                tokens
                    .iter()
                    .map(|&w| {
                        let p: f64 = authors
                            .iter()
                            .map(|&k| {
                                (wa.get(w, k) as f64 + beta) / (wa.col_total(k) as f64 + v_beta)
                            })
                            .sum();
                        (share * p).ln()
                    })
                    .sum()
            }
            _ => {
                let wt = self.counts.word_topic.as_ref().expect("topic counts");
                let mix = self.topic_mixture(authors);
                let topic_den: Vec<f64> =
                    wt.col_totals().iter().map(|&n| n as f64 + v_beta).collect();
                tokens
                    .iter()
                    .map(|&w| {
                        let row = wt.row(w);
                        let p: f64 = (0..mix.len())
                            .map(|j| mix[j] * (row[j] as f64 + beta) / topic_den[j])
                            .sum();
                        p.ln()
                    })
                    .sum()
            }
        }
    }
}

fn predictive(sample: &Sample) -> Predictive<'_> {
    let s = sample.state();
    Predictive {
        config: s.config(),
        vocab_size: s.vocab_size(),
        counts: s.counts(),
        doc_row: None,
    }
}

fn check_inputs(samples: &SampleSet, tokens: &[usize], authors: &[usize]) -> Result<(), EvalError> {
    if authors.is_empty() {
        return Err(EvalError::EmptyAuthorSet);
    }
    if let Some(&k) = authors.iter().find(|&&k| k >= samples.num_authors()) {
        return Err(EvalError::UnknownAuthor(k));
    }
    if let Some(&w) = tokens.iter().find(|&&w| w >= samples.vocab_size()) {
        return Err(EvalError::UnknownWord(w));
    }
    Ok(())
}

fn distinct(authors: &[usize]) -> Vec<usize> {
    let mut a = sorted_authors(authors);
    a.dedup();
    a
}

/// `ln(1/S sum_s exp(x_s))` without overflow.
pub fn log_mean_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln() - (values.len() as f64).ln()
}

/// `sum_m ln((1/A_d) sum_k sum_j theta[k][j] phi[w_m][j])` for one set of
/// point estimates (`phi` is `V x T`, `theta` is `A x T`).
pub fn estimate_log_likelihood(
    phi: &Array2<f64>,
    theta: &Array2<f64>,
    tokens: &[usize],
    authors: &[usize],
) -> f64 {
    let share = 1.0 / authors.len() as f64;
    tokens
        .iter()
        .map(|&w| {
            let p: f64 = authors.iter().map(|&k| theta.row(k).dot(&phi.row(w))).sum();
            (share * p).ln()
        })
        .sum()
}

/// Natural-log probability of `tokens` written by `authors`, averaged over
/// the samples on the probability scale.
pub fn doc_log_likelihood(
    samples: &SampleSet,
    tokens: &[usize],
    authors: &[usize],
) -> Result<f64, EvalError> {
    check_inputs(samples, tokens, authors)?;
    let authors = distinct(authors);
    let per_sample: Vec<f64> = samples
        .samples()
        .iter()
        .map(|s| predictive(s).log_likelihood(tokens, &authors))
        .collect();
    Ok(log_mean_exp(&per_sample))
}

/// `exp(-ln p(w | a) / N)` over the whole token sequence.
pub fn perplexity(
    samples: &SampleSet,
    tokens: &[usize],
    authors: &[usize],
) -> Result<f64, EvalError> {
    if tokens.is_empty() {
        return Err(EvalError::EmptyDocument);
    }
    let ll = doc_log_likelihood(samples, tokens, authors)?;
    Ok((-ll / tokens.len() as f64).exp())
}

/// A sample whose counts include the folded-in words of one extra document.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldedSample {
    config: ModelConfig,
    vocab_size: usize,
    counts: CountTables,
    doc_row: Option<usize>,
    /// Final assignments of the folded-in tokens, in `heldin` order.
    pub assignments: Vec<Outcome>,
}

impl FoldedSample {
    pub fn counts(&self) -> &CountTables {
        &self.counts
    }

    /// Point estimates from the updated counts. For LDA, `theta_doc` has one
    /// extra last row for the folded document when any word was folded in.
    pub fn estimates(&self) -> EstimateMatrices {
        EstimateMatrices::from_counts(&self.counts, self.config.hyper)
    }

    /// Topic mixture used to predict the document's remaining words
    /// (`None` for the author model).
    pub fn doc_topic_mixture(&self, authors: &[usize]) -> Option<Vec<f64>> {
        self.config
            .kind
            .has_topics()
            .then(|| self.predictive().topic_mixture(&distinct(authors)))
    }

    fn predictive(&self) -> Predictive<'_> {
        Predictive {
            config: &self.config,
            vocab_size: self.vocab_size,
            counts: &self.counts,
            doc_row: self.doc_row,
        }
    }
}

/// Conditions a copy of `sample` on the tokens of `doc` at positions
/// `heldin`.
///
/// The held-in tokens are added to the counts with random assignments and
/// resampled for `sweeps` Gibbs sweeps over those tokens only; the training
/// assignments stay fixed. `sample` itself is not modified.
pub fn foldin_update(
    sample: &Sample,
    doc: &Document,
    heldin: &[usize],
    sweeps: usize,
    seed: u64,
) -> Result<FoldedSample, EvalError> {
    let state = sample.state();
    let config = *state.config();
    if doc.authors.is_empty() {
        return Err(EvalError::EmptyAuthorSet);
    }
    if let Some(&k) = doc.authors.iter().find(|&&k| k >= state.num_authors()) {
        return Err(EvalError::UnknownAuthor(k));
    }
    let words = heldin
        .iter()
        .map(|&p| {
            let w = *doc.tokens.get(p).ok_or(EvalError::PositionOutOfRange(p))?;
            if w >= state.vocab_size() {
                return Err(EvalError::UnknownWord(w));
            }
            Ok(w)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut counts = state.counts().clone();
    if words.is_empty() {
        return Ok(FoldedSample {
            config,
            vocab_size: state.vocab_size(),
            counts,
            doc_row: None,
            assignments: Vec::new(),
        });
    }
    let row = state.num_documents();
    if let Some(dt) = counts.doc_topic.as_mut() {
        dt.push_zero_rows(1);
    }
    let authors = distinct(&doc.authors);
    let ad = authors.len();
    let t = config.topics;
    let mut rng = ChainRng::seed_from_u64(seed);
    let support = match config.kind {
        ModelKind::Lda => t,
        ModelKind::Author => ad,
        ModelKind::AuthorTopic => t * ad,
    };
    let mut assignments: Vec<Outcome> = words
        .iter()
        .map(|&w| {
            let idx = ((uniform(&mut rng) * support as f64) as usize).min(support - 1);
            let o = match config.kind {
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
            counts.add(row, w, o);
            o
        })
        .collect();
    let mut kernel = Kernel::new(&config, state.vocab_size(), ad);
    for _ in 0..sweeps {
        for (o, &w) in assignments.iter_mut().zip(&words) {
            *o = kernel.resample(&mut counts, row, w, &authors, *o, &mut rng);
        }
    }
    Ok(FoldedSample {
        config,
        vocab_size: state.vocab_size(),
        counts,
        doc_row: Some(row),
        assignments,
    })
}

/// Perplexity of one evaluated document.
#[derive(Debug, Clone, PartialEq)]
pub struct DocPerplexity {
    /// Index of the document in the test set.
    pub doc: usize,
    pub n_tokens: usize,
    /// Words folded in before prediction.
    pub n_train: usize,
    /// Words predicted (the `N` of the perplexity).
    pub n_heldout: usize,
    pub log_likelihood: f64,
    pub perplexity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerplexityReport {
    pub docs: Vec<DocPerplexity>,
    /// Mean of the per-document perplexities.
    pub mean: f64,
    pub samples: usize,
    /// Requested fold-in size (0 in whole-document mode).
    pub n_train: usize,
    /// Documents whose fold-in size was reduced to leave one word to predict.
    pub clamped: usize,
    /// Documents skipped because they have no tokens.
    pub skipped: usize,
}

fn mean(docs: &[DocPerplexity]) -> f64 {
    if docs.is_empty() {
        f64::NAN
    } else {
        docs.iter().map(|d| d.perplexity).sum::<f64>() / docs.len() as f64
    }
}

/// Perplexity of every non-empty test document over all of its words, given
/// its listed authors.
pub fn whole_document_perplexity(
    samples: &SampleSet,
    test: &[Document],
) -> Result<PerplexityReport, EvalError> {
    let results: Vec<Option<DocPerplexity>> = test
        .par_iter()
        .enumerate()
        .map(|(i, doc)| {
            if doc.is_empty() {
                return Ok(None);
            }
            let ll = doc_log_likelihood(samples, &doc.tokens, &doc.authors)?;
            Ok(Some(DocPerplexity {
                doc: i,
                n_tokens: doc.len(),
                n_train: 0,
                n_heldout: doc.len(),
                log_likelihood: ll,
                perplexity: (-ll / doc.len() as f64).exp(),
            }))
        })
        .collect::<Result<_, EvalError>>()?;
    let skipped = results.iter().filter(|r| r.is_none()).count();
    let docs: Vec<DocPerplexity> = results.into_iter().flatten().collect();
    Ok(PerplexityReport {
        mean: mean(&docs),
        docs,
        samples: samples.len(),
        n_train: 0,
        clamped: 0,
        skipped,
    })
}

/// Fold-in perplexity of one document: `n_train` random words are folded
/// into every sample and the remaining words are predicted.
pub fn foldin_perplexity(
    samples: &SampleSet,
    doc: &Document,
    n_train: usize,
    sweeps: usize,
    seed: u64,
) -> Result<(f64, usize), EvalError> {
    if doc.authors.is_empty() {
        return Err(EvalError::EmptyAuthorSet);
    }
    let split = split_document_foldin(doc, n_train, seed)?;
    if split.heldout.is_empty() {
        return Err(EvalError::EmptyDocument);
    }
    let heldout: Vec<usize> = split.heldout.iter().map(|&p| doc.tokens[p]).collect();
    check_inputs(samples, &heldout, &doc.authors)?;
    let authors = distinct(&doc.authors);
    let per_sample = samples
        .samples()
        .iter()
        .enumerate()
        .map(|(s, sample)| {
            let folded = foldin_update(
                sample,
                doc,
                &split.heldin,
                sweeps,
                derive_seed(seed, s as u64),
            )?;
            Ok(folded.predictive().log_likelihood(&heldout, &authors))
        })
        .collect::<Result<Vec<f64>, EvalError>>()?;
    let ll = log_mean_exp(&per_sample);
    Ok(((-ll / heldout.len() as f64).exp(), heldout.len()))
}

/// Mean held-out perplexity over `test` for each fold-in size in `grid`.
///
/// Documents shorter than `n_train + 1` words fold in `N_d - 1` words
/// instead (counted in [`PerplexityReport::clamped`]); empty documents are
/// skipped. Document `i` at grid value `n` uses the split seed
/// `derive_seed(derive_seed(seed, i), n)`.
pub fn perplexity_curve(
    samples: &SampleSet,
    test: &[Document],
    grid: &[usize],
    sweeps: usize,
    seed: u64,
) -> Result<Vec<PerplexityReport>, EvalError> {
    grid.iter()
        .map(|&n_train| {
            let results: Vec<Option<(DocPerplexity, bool)>> = test
                .par_iter()
                .enumerate()
                .map(|(i, doc)| {
                    if doc.is_empty() {
                        return Ok(None);
                    }
                    let used = n_train.min(doc.len() - 1);
                    let doc_seed = derive_seed(derive_seed(seed, i as u64), n_train as u64);
                    let (perplexity, n_heldout) =
                        foldin_perplexity(samples, doc, used, sweeps, doc_seed)?;
                    Ok(Some((
                        DocPerplexity {
                            doc: i,
                            n_tokens: doc.len(),
                            n_train: used,
                            n_heldout,
                            log_likelihood: -(n_heldout as f64) * perplexity.ln(),
                            perplexity,
                        },
                        used < n_train,
                    )))
                })
                .collect::<Result<_, EvalError>>()?;
            let skipped = results.iter().filter(|r| r.is_none()).count();
            let clamped = results.iter().flatten().filter(|(_, c)| *c).count();
            let docs: Vec<DocPerplexity> = results.into_iter().flatten().map(|(d, _)| d).collect();
            Ok(PerplexityReport {
                mean: mean(&docs),
                docs,
                samples: samples.len(),
                n_train,
                clamped,
                skipped,
            })
        })
        .collect()
}

/// Every author ranked by the perplexity of a document under that author alone.
#[derive(Debug, Clone, PartialEq)]
pub struct AuthorRanking {
    /// 1-based rank of the true author.
    pub rank: usize,
    /// `(author, perplexity)`, ascending perplexity, ties by author id.
    pub table: Vec<(usize, f64)>,
}

/// Scores `tokens` under each author of the model as sole author and reports
/// where `true_author` lands.
pub fn rank_authors_for_doc(
    samples: &SampleSet,
    tokens: &[usize],
    true_author: usize,
) -> Result<AuthorRanking, EvalError> {
    if !samples.kind().has_authors() {
        return Err(EvalError::WrongKind(samples.kind()));
    }
    if tokens.is_empty() {
        return Err(EvalError::EmptyDocument);
    }
    check_inputs(samples, tokens, &[true_author])?;
    let mut table: Vec<(usize, f64)> = (0..samples.num_authors())
        .into_par_iter()
        .map(|a| perplexity(samples, tokens, &[a]).map(|p| (a, p)))
        .collect::<Result<_, _>>()?;
    table.sort_by(|x, y| x.1.total_cmp(&y.1).then(x.0.cmp(&y.0)));
    let rank = table.iter().position(|&(a, _)| a == true_author).unwrap() + 1;
    Ok(AuthorRanking { rank, table })
}
