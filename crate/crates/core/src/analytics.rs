//! Topic summaries, author similarity and author entropy.

use std::fmt::Write as _;

use ndarray::{Array2, ArrayView1};
use rayon::prelude::*;
use thiserror::Error;

use crate::chains::{Sample, SampleSet};
use crate::corpus::Corpus;
use crate::model::ModelKind;

/// Tolerance on `sum(p) == 1` for distribution arguments.
pub const SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum AnalyticsError {
    #[error("topic {topic} out of range (model has {topics} topics)")]
    TopicOutOfRange { topic: usize, topics: usize },
    #[error("not a probability distribution (sum {0})")]
    NotADistribution(f64),
    #[error("distribution has a zero or negative component at index {0}")]
    ZeroComponent(usize),
    #[error("distributions have different lengths ({0} and {1})")]
    LengthMismatch(usize, usize),
    #[error("operation needs an author-topic model, samples are {0}")]
    WrongKind(ModelKind),
}

/// Indices of the `n` largest values, descending, ties by index ascending.
fn top_n(values: &[f64], n: usize) -> Vec<(usize, f64)> {
    let mut order: Vec<(usize, f64)> = values.iter().copied().enumerate().collect();
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    order.truncate(n);
    order
}

/// The `n` most probable words of topic `topic` in a `V x T` matrix.
pub fn top_words(
    phi: &Array2<f64>,
    topic: usize,
    n: usize,
) -> Result<Vec<(usize, f64)>, AnalyticsError> {
    if topic >= phi.ncols() {
        return Err(AnalyticsError::TopicOutOfRange {
            topic,
            topics: phi.ncols(),
        });
    }
    Ok(top_n(&phi.column(topic).to_vec(), n))
}

/// `p(author | topic)`: column `topic` of `C_AT` normalized to sum to one,
/// uniform when the column is empty.
pub fn author_given_topic(sample: &Sample, topic: usize) -> Result<Vec<f64>, AnalyticsError> {
    let state = sample.state();
    if state.kind() != ModelKind::AuthorTopic {
        return Err(AnalyticsError::WrongKind(state.kind()));
    }
    let at = state
        .counts()
        .author_topic
        .as_ref()
        .expect("author-topic counts");
    if topic >= at.cols() {
        return Err(AnalyticsError::TopicOutOfRange {
            topic,
            topics: at.cols(),
        });
    }
    let total = at.col_total(topic);
    Ok(if total == 0 {
        vec![1.0 / at.rows() as f64; at.rows()]
    } else {
        at.column(topic).map(|c| c as f64 / total as f64).collect()
    })
}

/// The `n` authors most likely to have generated a word of topic `topic`.
pub fn top_authors(
    sample: &Sample,
    topic: usize,
    n: usize,
) -> Result<Vec<(usize, f64)>, AnalyticsError> {
    Ok(top_n(&author_given_topic(sample, topic)?, n))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopicSummary {
    pub topic: usize,
    pub words: Vec<(String, f64)>,
    /// Empty for models without authors.
    pub authors: Vec<(String, f64)>,
}

impl TopicSummary {
    /// Builds the summary of `topic` from one sample, naming words and
    /// authors through `corpus`.
    pub fn from_sample(
        sample: &Sample,
        corpus: &Corpus,
        topic: usize,
        n: usize,
    ) -> Result<Self, AnalyticsError> {
        let kind = sample.state().kind();
        let phi = sample
            .estimates()
            .phi
            .as_ref()
            .ok_or(AnalyticsError::WrongKind(kind))?;
        let words = top_words(phi, topic, n)?
            .into_iter()
            .map(|(w, p)| (corpus.vocabulary.word(w).unwrap_or("?").to_string(), p))
            .collect();
        let authors = if kind == ModelKind::AuthorTopic {
            top_authors(sample, topic, n)?
                .into_iter()
                .map(|(a, p)| (corpus.authors.name(a).unwrap_or("?").to_string(), p))
                .collect()
        } else {
            Vec::new()
        };
        Ok(TopicSummary {
            topic,
            words,
            authors,
        })
    }

    /// Text block: a `TOPIC j` line, a words table and an authors table,
    /// tab-separated, followed by a blank line.
    pub fn to_block(&self, precision: usize) -> String {
        let mut out = format!("TOPIC {}\nWORD\tPROB.\n", self.topic);
        for (w, p) in &self.words {
            let _ = writeln!(out, "{w}\t{p:.precision$}");
        }
        if !self.authors.is_empty() {
            out.push_str("AUTHOR\tPROB.\n");
            for (a, p) in &self.authors {
                let _ = writeln!(out, "{a}\t{p:.precision$}");
            }
        }
        out.push('\n');
        out
    }
}

fn check_distribution(p: ArrayView1<f64>) -> Result<(), AnalyticsError> {
    let sum: f64 = p.sum();
    if !sum.is_finite() || (sum - 1.0).abs() > SUM_TOLERANCE || p.iter().any(|&x| x < 0.0) {
        return Err(AnalyticsError::NotADistribution(sum));
    }
    Ok(())
}

/// `sum_t p_t ln(p_t/q_t) + q_t ln(q_t/p_t)`.
pub fn symmetric_kl(p: ArrayView1<f64>, q: ArrayView1<f64>) -> Result<f64, AnalyticsError> {
    if p.len() != q.len() {
        return Err(AnalyticsError::LengthMismatch(p.len(), q.len()));
    }
    check_distribution(p)?;
    check_distribution(q)?;
    if let Some(i) = p
        .iter()
        .zip(q.iter())
        .position(|(&a, &b)| a <= 0.0 || b <= 0.0)
    {
        return Err(AnalyticsError::ZeroComponent(i));
    }
    Ok(p.iter()
        .zip(q.iter())
        .map(|(&a, &b)| (a - b) * (a / b).ln())
        .sum())
}

/// `-sum_t p_t ln p_t`, with `0 ln 0 = 0`.
pub fn entropy(p: ArrayView1<f64>) -> Result<f64, AnalyticsError> {
    check_distribution(p)?;
    Ok(-p
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| x * x.ln())
        .sum::<f64>())
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuthorPairDistance {
    /// The smaller author id of the pair.
    pub i: usize,
    pub j: usize,
    /// Symmetric KL divergence averaged over samples.
    pub value: f64,
    /// Documents written by both.
    pub n_common: usize,
    pub n_i: usize,
    pub n_j: usize,
}

fn theta_authors(samples: &SampleSet) -> Result<Vec<&Array2<f64>>, AnalyticsError> {
    if samples.kind() != ModelKind::AuthorTopic {
        return Err(AnalyticsError::WrongKind(samples.kind()));
    }
    Ok(samples
        .samples()
        .iter()
        .map(|s| {
            s.estimates()
                .theta_author
                .as_ref()
                .expect("author-topic estimates")
        })
        .collect())
}

/// Symmetric KL divergence between every pair of authors with more than
/// `min_papers` documents in `corpus`, ascending, ties by `(i, j)`.
///
/// Each pair's value is the mean over samples of the per-sample divergence
/// between the authors' `theta` rows.
pub fn author_distance_table(
    samples: &SampleSet,
    min_papers: usize,
    corpus: &Corpus,
) -> Result<Vec<AuthorPairDistance>, AnalyticsError> {
    let thetas = theta_authors(samples)?;
    let papers = corpus.papers_per_author();
    let eligible: Vec<usize> = (0..papers.len().min(samples.num_authors()))
        .filter(|&a| papers[a] > min_papers)
        .collect();
    let pairs: Vec<(usize, usize)> = eligible
        .iter()
        .enumerate()
        .flat_map(|(x, &i)| eligible[x + 1..].iter().map(move |&j| (i, j)))
        .collect();
    let mut table = pairs
        .into_par_iter()
        .map(|(i, j)| {
            let mut sum = 0.0;
            for th in &thetas {
                sum += symmetric_kl(th.row(i), th.row(j))?;
            }
            let n_common = corpus
                .documents
                .iter()
                .filter(|d| d.authors.contains(&i) && d.authors.contains(&j))
                .count();
            Ok(AuthorPairDistance {
                i,
                j,
                value: sum / thetas.len() as f64,
                n_common,
                n_i: papers[i],
                n_j: papers[j],
            })
        })
        .collect::<Result<Vec<_>, AnalyticsError>>()?;
    table.sort_by(|a, b| {
        a.value
            .total_cmp(&b.value)
            .then((a.i, a.j).cmp(&(b.i, b.j)))
    });
    Ok(table)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuthorEntropy {
    pub author: usize,
    /// Entropy of the author's topic distribution, averaged over samples.
    pub entropy: f64,
    pub n_papers: usize,
}

/// Topic entropy of every author with more than `min_papers` documents in
/// `corpus`, descending, ties by author id.
pub fn author_entropy_table(
    samples: &SampleSet,
    min_papers: usize,
    corpus: &Corpus,
) -> Result<Vec<AuthorEntropy>, AnalyticsError> {
    let thetas = theta_authors(samples)?;
    let papers = corpus.papers_per_author();
    let mut table = (0..papers.len().min(samples.num_authors()))
        .filter(|&a| papers[a] > min_papers)
        .map(|a| {
            let mut sum = 0.0;
            for th in &thetas {
                sum += entropy(th.row(a))?;
            }
            Ok(AuthorEntropy {
                author: a,
                entropy: sum / thetas.len() as f64,
                n_papers: papers[a],
            })
        })
        .collect::<Result<Vec<_>, AnalyticsError>>()?;
    table.sort_by(|a, b| {
        b.entropy
            .total_cmp(&a.entropy)
            .then(a.author.cmp(&b.author))
    });
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::corpus;
    use crate::model::{AssignmentState, Hyperparameters, ModelConfig, Outcome, SamplerState};
    use ndarray::{array, Array1};
    use proptest::prelude::*;

    #[test]
    fn top_words_order() {
        let phi = array![[0.1, 0.2], [0.5, 0.2], [0.4, 0.6]];
        assert_eq!(top_words(&phi, 0, 2).unwrap(), vec![(1, 0.5), (2, 0.4)]);
        assert_eq!(top_words(&phi, 0, 10).unwrap().len(), 3);
        assert_eq!(top_words(&phi, 1, 2).unwrap(), vec![(2, 0.6), (0, 0.2)]);
        assert_eq!(
            top_words(&phi, 2, 1),
            Err(AnalyticsError::TopicOutOfRange {
                topic: 2,
                topics: 2
            })
        );
    }

    fn at_sample(c: &Corpus, t: usize, z: &[Vec<(usize, usize)>]) -> Sample {
        let cfg = ModelConfig::new(
            ModelKind::AuthorTopic,
            t,
            Hyperparameters::new(0.5, 0.1).unwrap(),
        )
        .unwrap();
        let mut asg = AssignmentState::for_corpus(c, cfg.kind);
        for (d, row) in z.iter().enumerate() {
            for (p, &(topic, author)) in row.iter().enumerate() {
                asg.set(
                    d,
                    p,
                    Outcome {
                        topic: Some(topic),
                        author: Some(author),
                    },
                );
            }
        }
        Sample::new(SamplerState::from_assignments(c, cfg, asg, 0, 0).unwrap())
    }

    #[test]
    fn author_given_topic_normalizes_counts() {
        let c = corpus(1, 4, vec![(vec![0, 1, 2, 3], vec![0; 10])]);
        let mut row = vec![(0, 0); 6];
        row.extend(vec![(0, 1); 3]);
        row.push((0, 2));
        let s = at_sample(&c, 2, &[row]);
        let p = author_given_topic(&s, 0).unwrap();
        assert_eq!(p, vec![0.6, 0.3, 0.1, 0.0]);
        assert_eq!(author_given_topic(&s, 1).unwrap(), vec![0.25; 4]);
        assert_eq!(top_authors(&s, 0, 2).unwrap(), vec![(0, 0.6), (1, 0.3)]);
    }

    #[test]
    fn summary_block_layout() {
        let c = corpus(2, 1, vec![(vec![0], vec![0, 1, 1, 1])]);
        let s = at_sample(&c, 1, &[vec![(0, 0); 4]]);
        let summary = TopicSummary::from_sample(&s, &c, 0, 10).unwrap();
        assert_eq!(summary.authors, vec![("a0".to_string(), 1.0)]);
        assert_eq!(
            summary.to_block(4),
            "TOPIC 0\nWORD\tPROB.\nw1\t0.7381\nw0\t0.2619\nAUTHOR\tPROB.\na0\t1.0000\n\n"
        );
    }

    #[test]
    fn skl_values() {
        let p = array![0.5, 0.5];
        let q = array![0.9, 0.1];
        let v = symmetric_kl(p.view(), q.view()).unwrap();
        let hand = 0.5 * (0.5f64 / 0.9).ln()
            + 0.5 * (0.5f64 / 0.1).ln()
            + 0.9 * (0.9f64 / 0.5).ln()
            + 0.1 * (0.1f64 / 0.5).ln();
        assert!((v - hand).abs() < 1e-12);
        assert!((v - 0.8789).abs() < 1e-4);
        assert_eq!(symmetric_kl(p.view(), p.view()).unwrap(), 0.0);
        assert_eq!(
            symmetric_kl(p.view(), array![1.0, 0.0].view()),
            Err(AnalyticsError::ZeroComponent(1))
        );
        assert!(matches!(
            symmetric_kl(p.view(), array![0.5, 0.6].view()),
            Err(AnalyticsError::NotADistribution(_))
        ));
    }

    #[test]
    fn entropy_values() {
        assert_eq!(entropy(array![0.0, 1.0, 0.0].view()).unwrap(), 0.0);
        assert!((entropy(Array1::from_elem(4, 0.25).view()).unwrap() - 4f64.ln()).abs() < 1e-12);
        assert!((entropy(array![0.5, 0.25, 0.25].view()).unwrap() - 1.0397).abs() < 1e-4);
    }

    #[test]
    fn distance_table_contract() {
        // authors 0 and 1 have identical C_AT rows, author 2 differs
        let c = corpus(
            2,
            3,
            vec![
                (vec![0], vec![0, 1]),
                (vec![1], vec![0, 1]),
                (vec![2], vec![1, 1]),
                (vec![0, 1], vec![]),
            ],
        );
        let s = at_sample(
            &c,
            2,
            &[
                vec![(0, 0), (1, 0)],
                vec![(0, 1), (1, 1)],
                vec![(1, 2), (1, 2)],
                vec![],
            ],
        );
        let set = SampleSet::new(vec![s.clone(), s]).unwrap();
        let table = author_distance_table(&set, 0, &c).unwrap();
        assert_eq!(table.len(), 3);
        assert_eq!((table[0].i, table[0].j, table[0].value), (0, 1, 0.0));
        assert_eq!((table[0].n_common, table[0].n_i, table[0].n_j), (1, 2, 2));
        assert!(table[1].value <= table[2].value);
        assert!(author_distance_table(&set, 1, &c).unwrap().len() == 1);
        assert!(author_distance_table(&set, 2, &c).unwrap().is_empty());

        let h = author_entropy_table(&set, 0, &c).unwrap();
        assert_eq!(h.len(), 3);
        assert!(h.windows(2).all(|w| w[0].entropy >= w[1].entropy));
        assert_eq!(h[2].author, 2);
    }

    fn dist(len: usize) -> impl Strategy<Value = Array1<f64>> {
        prop::collection::vec(0.01f64..10.0, len).prop_map(|v| {
            let s: f64 = v.iter().sum();
            Array1::from_iter(v.into_iter().map(|x| x / s))
        })
    }

    proptest! {
        #[test]
        fn skl_symmetric_nonnegative(p in dist(5), q in dist(5)) {
            let a = symmetric_kl(p.view(), q.view()).unwrap();
            let b = symmetric_kl(q.view(), p.view()).unwrap();
            prop_assert!(a >= 0.0 && a.is_finite());
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        }

        #[test]
        fn entropy_bounded(p in dist(7)) {
            let h = entropy(p.view()).unwrap();
            prop_assert!(h >= 0.0 && h <= 7f64.ln() + 1e-12);
        }
    }
}
