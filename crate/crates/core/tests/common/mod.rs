#![allow(dead_code)]

use author_topic::corpus::{AuthorRegistry, Corpus, Document, Vocabulary};
use author_topic::model::{ModelKind, Outcome, SamplerState};
use author_topic::rng::{draw_index, uniform, ChainRng};
use ndarray::Array2;
use rand::SeedableRng;

pub fn registries(v: usize, a: usize) -> (Vocabulary, AuthorRegistry) {
    (
        Vocabulary::new((0..v).map(|i| format!("w{i}"))).unwrap(),
        AuthorRegistry::new((0..a).map(|i| format!("a{i}"))).unwrap(),
    )
}

pub fn corpus(v: usize, a: usize, docs: Vec<Document>) -> Corpus {
    let (vocab, authors) = registries(v, a);
    Corpus::new(docs, vocab, authors).unwrap()
}

/// `x (x+1) ... (x+n-1)`
fn rising(x: f64, n: u32) -> f64 {
    (0..n).map(|t| x + t as f64).product()
}

/// Collapsed joint probability of the words and the given assignments,
/// computed from scratch by Polya-urn products over fresh counts.
pub fn collapsed_joint(
    corpus: &Corpus,
    kind: ModelKind,
    t: usize,
    alpha: f64,
    beta: f64,
    outcome: impl Fn(usize, usize) -> Outcome,
) -> f64 {
    let v = corpus.vocab_size();
    let a = corpus.num_authors();
    // "groups" generate topics (documents or authors); "sources" generate words (topics or authors)
    let (n_groups, n_sources) = match kind {
        ModelKind::Lda => (corpus.num_documents(), t),
        ModelKind::AuthorTopic => (a, t),
        ModelKind::Author => (0, a),
    };
    let mut group_topic = vec![vec![0u32; t]; n_groups];
    let mut source_word = vec![vec![0u32; v]; n_sources];
    let mut p = 1.0;
    for (d, doc) in corpus.documents.iter().enumerate() {
        for (pos, &w) in doc.tokens.iter().enumerate() {
            let o = outcome(d, pos);
            match kind {
                ModelKind::Lda => {
                    let z = o.topic.unwrap();
                    group_topic[d][z] += 1;
                    source_word[z][w] += 1;
                }
                ModelKind::AuthorTopic => {
                    let (z, x) = (o.topic.unwrap(), o.author.unwrap());
                    assert!(doc.authors.contains(&x));
                    p /= doc.authors.len() as f64;
                    group_topic[x][z] += 1;
                    source_word[z][w] += 1;
                }
                ModelKind::Author => {
                    let x = o.author.unwrap();
                    assert!(doc.authors.contains(&x));
                    p /= doc.authors.len() as f64;
                    source_word[x][w] += 1;
                }
            }
        }
    }
    for row in &group_topic {
        let n: u32 = row.iter().sum();
        p /= rising(t as f64 * alpha, n);
        p *= row.iter().map(|&c| rising(alpha, c)).product::<f64>();
    }
    for row in &source_word {
        let n: u32 = row.iter().sum();
        p /= rising(v as f64 * beta, n);
        p *= row.iter().map(|&c| rising(beta, c)).product::<f64>();
    }
    p
}

/// Exact conditional of token `(doc, pos)` by enumerating its outcomes in the
/// collapsed joint, in the sampler's support order.
pub fn brute_force_conditional(
    state: &SamplerState,
    corpus: &Corpus,
    doc: usize,
    pos: usize,
) -> Vec<(Outcome, f64)> {
    let cfg = state.config();
    let mut authors = corpus.documents[doc].authors.clone();
    authors.sort_unstable();
    let support: Vec<Outcome> = match cfg.kind {
        ModelKind::Lda => (0..cfg.topics)
            .map(|j| Outcome {
                topic: Some(j),
                author: None,
            })
            .collect(),
        ModelKind::Author => authors
            .iter()
            .map(|&k| Outcome {
                topic: None,
                author: Some(k),
            })
            .collect(),
        ModelKind::AuthorTopic => (0..cfg.topics)
            .flat_map(|j| {
                authors.iter().map(move |&k| Outcome {
                    topic: Some(j),
                    author: Some(k),
                })
            })
            .collect(),
    };
    let joints: Vec<f64> = support
        .iter()
        .map(|&o| {
            collapsed_joint(
                corpus,
                cfg.kind,
                cfg.topics,
                cfg.hyper.alpha,
                cfg.hyper.beta,
                |d, p| {
                    if (d, p) == (doc, pos) {
                        o
                    } else {
                        state.assignments().outcome(d, p)
                    }
                },
            )
        })
        .collect();
    let total: f64 = joints.iter().sum();
    support
        .into_iter()
        .zip(joints.into_iter().map(|j| j / total))
        .collect()
}

/// A corpus drawn from a known author-topic model.
pub struct Planted {
    pub corpus: Corpus,
    /// `V x T`
    pub phi: Array2<f64>,
    /// `A x T`
    pub theta: Array2<f64>,
}

pub struct PlantedSpec {
    pub topics: usize,
    pub vocab: usize,
    pub authors: usize,
    pub docs: usize,
    pub doc_len: usize,
    /// Probability mass of a topic on its own block of `vocab / topics` words.
    pub block_mass: f64,
    /// Topics of each author and the mass spread evenly over them; the
    /// remaining mass is spread over the other topics.
    pub author_topics: Vec<Vec<usize>>,
    pub author_mass: f64,
    /// Probability that a document has a second author.
    pub coauthor_rate: f64,
}

impl PlantedSpec {
    /// Five topics over fifty words, ten authors, two per primary topic.
    pub fn standard() -> Self {
        PlantedSpec {
            topics: 5,
            vocab: 50,
            authors: 10,
            docs: 200,
            doc_len: 50,
            block_mass: 0.95,
            author_topics: (0..10).map(|k| vec![k % 5]).collect(),
            author_mass: 0.9,
            coauthor_rate: 0.25,
        }
    }

    pub fn phi(&self) -> Array2<f64> {
        let block = self.vocab / self.topics;
        Array2::from_shape_fn((self.vocab, self.topics), |(w, j)| {
            if w / block == j {
                self.block_mass / block as f64
            } else {
                (1.0 - self.block_mass) / (self.vocab - block) as f64
            }
        })
    }

    pub fn theta(&self) -> Array2<f64> {
        Array2::from_shape_fn((self.authors, self.topics), |(k, j)| {
            let own = &self.author_topics[k];
            if own.len() == self.topics {
                1.0 / self.topics as f64
            } else if own.contains(&j) {
                self.author_mass / own.len() as f64
            } else {
                (1.0 - self.author_mass) / (self.topics - own.len()) as f64
            }
        })
    }

    pub fn generate(&self, seed: u64) -> Planted {
        let phi = self.phi();
        let theta = self.theta();
        let mut rng = ChainRng::seed_from_u64(seed);
        let docs = (0..self.docs)
            .map(|_| {
                let first = draw_index(&vec![1.0; self.authors], uniform(&mut rng));
                let mut authors = vec![first];
                if uniform(&mut rng) < self.coauthor_rate {
                    let mut w = vec![1.0; self.authors];
                    w[first] = 0.0;
                    authors.push(draw_index(&w, uniform(&mut rng)));
                }
                let tokens = self.tokens(&phi, &theta, &authors, self.doc_len, &mut rng);
                Document::new(authors, tokens)
            })
            .collect();
        Planted {
            corpus: corpus(self.vocab, self.authors, docs),
            phi,
            theta,
        }
    }

    /// Words of a document written by `authors` under the planted model.
    pub fn tokens(
        &self,
        phi: &Array2<f64>,
        theta: &Array2<f64>,
        authors: &[usize],
        len: usize,
        rng: &mut ChainRng,
    ) -> Vec<usize> {
        (0..len)
            .map(|_| {
                let x = authors[draw_index(&vec![1.0; authors.len()], uniform(rng))];
                let z = draw_index(&theta.row(x).to_vec(), uniform(rng));
                draw_index(&phi.column(z).to_vec(), uniform(rng))
            })
            .collect()
    }
}

pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Greedy one-to-one matching of recovered topics (columns of `found`) to
/// planted ones (columns of `planted`) by increasing total variation.
/// Returns `m` with `m[planted topic] = recovered topic`.
pub fn match_topics(planted: &Array2<f64>, found: &Array2<f64>) -> Vec<usize> {
    let t = planted.ncols();
    let mut pairs: Vec<(f64, usize, usize)> = (0..t)
        .flat_map(|i| (0..t).map(move |j| (i, j)))
        .map(|(i, j)| {
            (
                total_variation(&planted.column(i).to_vec(), &found.column(j).to_vec()),
                i,
                j,
            )
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    let mut m = vec![usize::MAX; t];
    let mut used = vec![false; t];
    for (_, i, j) in pairs {
        if m[i] == usize::MAX && !used[j] {
            m[i] = j;
            used[j] = true;
        }
    }
    m
}
