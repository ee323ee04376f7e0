//! Author-topic model, LDA and the author model, fitted by collapsed Gibbs
//! sampling over per-token assignments.
//!
//! The crate covers the whole workflow: corpus files ([`corpus`]), count
//! tables and point estimates ([`model`]), the Gibbs sampler ([`sampler`]),
//! multi-chain runs and snapshots ([`chains`]), held-out perplexity and author
//! ranking ([`evaluation`]), and topic / author summaries ([`analytics`]).
//! The `atm` binary exposes the same operations on the command line ([`cli`]).

pub mod analytics;
pub mod chains;
pub mod cli;
pub mod corpus;
pub mod evaluation;
pub mod model;
pub mod rng;
pub mod sampler;

pub use chains::{run_ensemble, Sample, SampleSet};
pub use corpus::{AuthorRegistry, Corpus, Document, Vocabulary};
pub use model::{
    default_hyperparameters, EstimateMatrices, Hyperparameters, ModelConfig, ModelKind,
    SamplerState,
};
pub use sampler::{run_chain, sweep};
