mod common;

use author_topic::corpus::Document;
use author_topic::model::{
    init_assignments, rebuild_counts, validate, Hyperparameters, ModelConfig, ModelKind, TokenRef,
};
use author_topic::rng::ChainRng;
use author_topic::sampler::{conditional_author, conditional_author_topic, conditional_lda, sweep};
use common::{brute_force_conditional, corpus};
use proptest::prelude::*;
use rand::SeedableRng;

fn kind() -> impl Strategy<Value = ModelKind> {
    prop_oneof![
        Just(ModelKind::Lda),
        Just(ModelKind::Author),
        Just(ModelKind::AuthorTopic)
    ]
}

/// Up to three documents over three words and two authors, eight tokens in all.
fn micro_docs() -> impl Strategy<Value = Vec<(Vec<usize>, Vec<usize>)>> {
    let doc = (
        prop_oneof![Just(vec![0]), Just(vec![1]), Just(vec![1, 0])],
        prop::collection::vec(0usize..3, 1..=3),
    );
    prop::collection::vec(doc, 1..=3).prop_filter("at most 8 tokens", |d| {
        d.iter().map(|x| x.1.len()).sum::<usize>() <= 8
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn conditionals_match_enumeration(
        docs in micro_docs(),
        kind in kind(),
        topics in 1usize..=2,
        alpha in 0.1f64..50.0,
        beta in 0.01f64..1.0,
        seed in any::<u64>(),
    ) {
        let c = corpus(3, 2, docs.into_iter().map(|(a, t)| Document::new(a, t)).collect());
        let cfg = ModelConfig::new(kind, topics, Hyperparameters::new(alpha, beta).unwrap()).unwrap();
        let mut state = init_assignments(&c, cfg, seed).unwrap();
        for d in 0..c.num_documents() {
            for p in 0..c.documents[d].len() {
                let exact = brute_force_conditional(&state, &c, d, p);
                let token = TokenRef::new(&c, d, p).unwrap();
                let current = state.assignments().outcome(d, p);
                state.remove_token(token).unwrap();
                let got = match kind {
                    ModelKind::Lda => conditional_lda(&state, &c, token),
                    ModelKind::Author => conditional_author(&state, &c, token),
                    ModelKind::AuthorTopic => conditional_author_topic(&state, &c, token),
                }.unwrap();
                let support: Vec<_> = exact.iter().map(|e| e.0).collect();
                prop_assert_eq!(&got.support, &support);
                for (o, p) in exact {
                    prop_assert!((got.probability(o) - p).abs() <= 1e-10);
                }
                state.assign_token(token, current).unwrap();
            }
        }
    }

    #[test]
    fn sweeps_conserve_counts(
        docs in prop::collection::vec(
            (prop::collection::btree_set(0usize..4, 1..=3), prop::collection::vec(0usize..12, 0..20)),
            1..8,
        ),
        kind in kind(),
        seed in any::<u64>(),
    ) {
        let docs: Vec<Document> = docs.into_iter().map(|(a, t)| Document::new(a.into_iter().collect(), t)).collect();
        prop_assume!(docs.iter().any(|d| !d.is_empty()));
        let c = corpus(12, 4, docs);
        let mut state = init_assignments(&c, ModelConfig::with_defaults(kind, 3).unwrap(), seed).unwrap();
        let mut rng = ChainRng::seed_from_u64(seed ^ 1);
        for _ in 0..5 {
            sweep(&mut state, &c, &mut rng).unwrap();
        }
        prop_assert!(validate(&state, &c).is_empty());
        prop_assert_eq!(&rebuild_counts(&c, state.assignments(), state.config()).unwrap(), state.counts());
        let total: u64 = match kind {
            ModelKind::Author => state.counts().word_author.as_ref().unwrap().total(),
            _ => state.counts().word_topic.as_ref().unwrap().total(),
        };
        prop_assert_eq!(total as usize, c.total_tokens());
        for d in 0..c.num_documents() {
            for p in 0..c.documents[d].len() {
                if let Some(k) = state.assignments().author(d, p) {
                    prop_assert!(c.documents[d].authors.contains(&k));
                }
            }
        }
    }
}
