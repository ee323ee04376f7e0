//! Multi-chain runs, frozen samples and their on-disk form.
//!
//! A model directory looks like
//!
//! ```text
//! <out>/manifest.txt
//! <out>/chain0/iter2000.atm
//! <out>/chain1/iter2000.atm
//! ...
//! ```
//!
//! Snapshot files are text. The first line is a header
//!
//! ```text
//! ATM v1 kind=<lda|author|at> V=<V> T=<T> A=<A> D=<D> alpha=<real> beta=<real> iter=<n> seed=<n>
//! ```
//!
//! followed by one line `d p z x` per token in (document, position) order,
//! with `-` for a field the model kind does not have. Counts are never
//! stored; they are rebuilt from the assignments on load.
//!
//! The manifest is `key=value` lines plus one
//! `chain=<k> seed=<seed> snapshot=<relative path>` line per chain.
//! Chain `k` is seeded with [`derive_seed`]`(base_seed, k)`.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use rayon::prelude::*;
use thiserror::Error;

use crate::corpus::Corpus;
use crate::model::{
    validate, AssignmentState, EstimateMatrices, Hyperparameters, ModelConfig, ModelError,
    ModelKind, Outcome, SamplerState, Violation,
};
use crate::rng::derive_seed;
use crate::sampler::{run_chain_with_progress, SamplerError};

/// One frozen chain state. Estimates are computed on first use.
#[derive(Debug)]
pub struct Sample {
    state: SamplerState,
    estimates: OnceLock<EstimateMatrices>,
}

impl Sample {
    pub fn new(state: SamplerState) -> Self {
        Sample {
            state,
            estimates: OnceLock::new(),
        }
    }

    pub fn state(&self) -> &SamplerState {
        &self.state
    }

    pub fn estimates(&self) -> &EstimateMatrices {
        self.estimates.get_or_init(|| self.state.estimates())
    }

    pub fn into_state(self) -> SamplerState {
        self.state
    }
}

impl Clone for Sample {
    fn clone(&self) -> Self {
        Sample::new(self.state.clone())
    }
}

impl PartialEq for Sample {
    fn eq(&self, other: &Self) -> bool {
        self.state == other.state
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ChainsError {
    #[error("at least one chain is required")]
    NoChains,
    #[error("samples disagree on {0}")]
    Inconsistent(&'static str),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
}

/// Samples used together for prediction; they share V, T, A, kind and priors.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    samples: Vec<Sample>,
}

impl SampleSet {
    pub fn new(samples: Vec<Sample>) -> Result<Self, ChainsError> {
        let first = samples.first().ok_or(ChainsError::NoChains)?.state();
        for s in &samples[1..] {
            let s = s.state();
            if s.vocab_size() != first.vocab_size() {
                return Err(ChainsError::Inconsistent("vocabulary size"));
            }
            if s.num_authors() != first.num_authors() {
                return Err(ChainsError::Inconsistent("author count"));
            }
            if s.config() != first.config() {
                return Err(ChainsError::Inconsistent("model configuration"));
            }
        }
        Ok(SampleSet { samples })
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn config(&self) -> &ModelConfig {
        self.samples[0].state().config()
    }

    pub fn kind(&self) -> ModelKind {
        self.config().kind
    }

    pub fn vocab_size(&self) -> usize {
        self.samples[0].state().vocab_size()
    }

    pub fn num_authors(&self) -> usize {
        self.samples[0].state().num_authors()
    }

    pub fn num_topics(&self) -> usize {
        self.config().topics
    }
}

/// Options for [`run_ensemble_with`].
#[derive(Default)]
pub struct EnsembleOptions<'a> {
    /// Worker threads; `None` uses rayon's global pool.
    pub threads: Option<usize>,
    /// Called as `progress(chain, iteration)` after every sweep.
    pub progress: Option<&'a (dyn Fn(usize, u64) + Sync)>,
}

/// Runs `chains` independent chains for `iterations` sweeps each and keeps
/// the final state of every chain, ordered by chain index.
pub fn run_ensemble(
    corpus: &Corpus,
    config: ModelConfig,
    base_seed: u64,
    chains: usize,
    iterations: u64,
) -> Result<SampleSet, ChainsError> {
    run_ensemble_with(
        corpus,
        config,
        base_seed,
        chains,
        iterations,
        &EnsembleOptions::default(),
    )
}

pub fn run_ensemble_with(
    corpus: &Corpus,
    config: ModelConfig,
    base_seed: u64,
    chains: usize,
    iterations: u64,
    options: &EnsembleOptions<'_>,
) -> Result<SampleSet, ChainsError> {
    if chains == 0 {
        return Err(ChainsError::NoChains);
    }
    let run = || {
        (0..chains)
            .into_par_iter()
            .map(|c| {
                let seed = derive_seed(base_seed, c as u64);
                let mut samples = run_chain_with_progress(
                    corpus,
                    config,
                    seed,
                    iterations,
                    &[iterations],
                    |it| {
                        if let Some(p) = options.progress {
                            p(c, it)
                        }
                    },
                )?;
                Ok(samples.pop().expect("one snapshot requested"))
            })
            .collect::<Result<Vec<_>, SamplerError>>()
    };
    let samples = match options.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .expect("thread pool")
            .install(run)?,
        None => run()?,
    };
    SampleSet::new(samples)
}

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("snapshot does not match the corpus: {0}")]
    CorpusMismatch(String),
    #[error("snapshot state is inconsistent: {0:?}")]
    Invalid(Vec<Violation>),
    #[error(transparent)]
    Chains(#[from] ChainsError),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> SnapshotError + '_ {
    move |source| SnapshotError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn format_err(line: usize, message: impl Into<String>) -> SnapshotError {
    SnapshotError::Format {
        line,
        message: message.into(),
    }
}

/// Header line of a snapshot file.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotHeader {
    pub config: ModelConfig,
    pub vocab_size: usize,
    pub num_authors: usize,
    pub num_documents: usize,
    pub iteration: u64,
    pub seed: u64,
}

impl SnapshotHeader {
    fn of(state: &SamplerState) -> Self {
        SnapshotHeader {
            config: *state.config(),
            vocab_size: state.vocab_size(),
            num_authors: state.num_authors(),
            num_documents: state.num_documents(),
            iteration: state.iteration(),
            seed: state.seed(),
        }
    }

    fn to_line(&self) -> String {
        format!(
            "ATM v1 kind={} V={} T={} A={} D={} alpha={} beta={} iter={} seed={}",
            self.config.kind,
            self.vocab_size,
            self.config.topics,
            self.num_authors,
            self.num_documents,
            self.config.hyper.alpha,
            self.config.hyper.beta,
            self.iteration,
            self.seed
        )
    }

    fn parse(line: &str) -> Result<Self, SnapshotError> {
        let bad = |m: &str| format_err(1, m);
        let rest = line
            .strip_prefix("ATM v1 ")
            .ok_or_else(|| bad("missing `ATM v1` header"))?;
        let mut fields = std::collections::HashMap::new();
        for item in rest.split_whitespace() {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| bad("header field without `=`"))?;
            fields.insert(k, v);
        }
        fn get<T: std::str::FromStr>(
            fields: &std::collections::HashMap<&str, &str>,
            key: &str,
        ) -> Result<T, SnapshotError> {
            fields
                .get(key)
                .ok_or_else(|| format_err(1, format!("header field `{key}` missing")))?
                .parse()
                .map_err(|_| format_err(1, format!("header field `{key}` is malformed")))
        }
        let kind: ModelKind = fields
            .get("kind")
            .ok_or_else(|| bad("header field `kind` missing"))?
            .parse()
            .map_err(|e: ModelError| bad(&e.to_string()))?;
        let hyper = Hyperparameters::new(get(&fields, "alpha")?, get(&fields, "beta")?)
            .map_err(|e| bad(&e.to_string()))?;
        let config =
            ModelConfig::new(kind, get(&fields, "T")?, hyper).map_err(|e| bad(&e.to_string()))?;
        Ok(SnapshotHeader {
            config,
            vocab_size: get(&fields, "V")?,
            num_authors: get(&fields, "A")?,
            num_documents: get(&fields, "D")?,
            iteration: get(&fields, "iter")?,
            seed: get(&fields, "seed")?,
        })
    }
}

/// A parsed snapshot file whose counts have not been rebuilt yet.
#[derive(Debug, Clone)]
pub struct RawSnapshot {
    pub header: SnapshotHeader,
    /// `(doc, pos, outcome)` in file order.
    pub tokens: Vec<(usize, usize, Outcome)>,
}

impl RawSnapshot {
    pub fn read<R: BufRead>(reader: R) -> Result<Self, SnapshotError> {
        let mut lines = reader.lines();
        let header = match lines.next() {
            Some(line) => SnapshotHeader::parse(&line.map_err(|e| format_err(1, e.to_string()))?)?,
            None => return Err(format_err(1, "empty snapshot")),
        };
        let kind = header.config.kind;
        let mut tokens = Vec::new();
        for (i, line) in lines.enumerate() {
            let lineno = i + 2;
            let line = line.map_err(|e| format_err(lineno, e.to_string()))?;
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 4 {
                return Err(format_err(lineno, "expected `d p z x`"));
            }
            let num = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| format_err(lineno, format!("bad number `{s}`")))
            };
            let opt =
                |s: &str, present: bool, what: &str| -> Result<Option<usize>, SnapshotError> {
                    match (s, present) {
                        ("-", false) => Ok(None),
                        (_, true) if s != "-" => num(s).map(Some),
                        _ => Err(format_err(
                            lineno,
                            format!("{what} field does not fit model kind {kind}"),
                        )),
                    }
                };
            let outcome = Outcome {
                topic: opt(f[2], kind.has_topics(), "topic")?,
                author: opt(f[3], kind.has_authors(), "author")?,
            };
            tokens.push((num(f[0])?, num(f[1])?, outcome));
        }
        Ok(RawSnapshot { header, tokens })
    }

    /// Rebuilds the sampler state against `corpus` without running
    /// [`validate`]; see [`load_snapshot`] for the checked path.
    pub fn into_state(self, corpus: &Corpus) -> Result<SamplerState, SnapshotError> {
        let h = &self.header;
        if h.vocab_size != corpus.vocab_size()
            || h.num_authors != corpus.num_authors()
            || h.num_documents != corpus.num_documents()
        {
            return Err(SnapshotError::CorpusMismatch(format!(
                "snapshot has V={} A={} D={}, corpus has V={} A={} D={}",
                h.vocab_size,
                h.num_authors,
                h.num_documents,
                corpus.vocab_size(),
                corpus.num_authors(),
                corpus.num_documents()
            )));
        }
        if self.tokens.len() != corpus.total_tokens() {
            return Err(SnapshotError::CorpusMismatch(format!(
                "snapshot has {} tokens, corpus has {}",
                self.tokens.len(),
                corpus.total_tokens()
            )));
        }
        let mut asg = AssignmentState::for_corpus(corpus, h.config.kind);
        let expected = corpus
            .documents
            .iter()
            .enumerate()
            .flat_map(|(d, doc)| (0..doc.len()).map(move |p| (d, p)));
        for (i, ((d, p, outcome), want)) in self.tokens.iter().zip(expected).enumerate() {
            if (*d, *p) != want {
                return Err(format_err(
                    i + 2,
                    format!("expected token {want:?}, found ({d}, {p})"),
                ));
            }
            asg.set(*d, *p, *outcome);
        }
        SamplerState::from_assignments(corpus, h.config, asg, h.iteration, h.seed).map_err(|e| {
            match e {
                ModelError::BadOutcome(m) => format_err(0, m),
                other => SnapshotError::CorpusMismatch(other.to_string()),
            }
        })
    }
}

/// Writes a state in snapshot format.
pub fn write_snapshot<W: Write>(state: &SamplerState, mut out: W) -> io::Result<()> {
    writeln!(out, "{}", SnapshotHeader::of(state).to_line())?;
    let asg = state.assignments();
    let mut line = String::new();
    for d in 0..asg.num_documents() {
        for p in 0..asg.doc_len(d) {
            line.clear();
            let o = asg.outcome(d, p);
            write!(line, "{d} {p} ").unwrap();
            match o.topic {
                Some(j) => write!(line, "{j} ").unwrap(),
                None => line.push_str("- "),
            }
            match o.author {
                Some(k) => write!(line, "{k}").unwrap(),
                None => line.push('-'),
            }
            line.push('\n');
            out.write_all(line.as_bytes())?;
        }
    }
    out.flush()
}

pub fn save_snapshot(sample: &Sample, path: &Path) -> Result<(), SnapshotError> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    write_snapshot(sample.state(), BufWriter::new(file)).map_err(io_err(path))
}

/// Loads a snapshot, rebuilds its counts from `corpus` and validates it.
pub fn load_snapshot(path: &Path, corpus: &Corpus) -> Result<Sample, SnapshotError> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    let state = RawSnapshot::read(BufReader::new(file))?.into_state(corpus)?;
    let violations = validate(&state, corpus);
    if !violations.is_empty() {
        return Err(SnapshotError::Invalid(violations));
    }
    Ok(Sample::new(state))
}

/// One chain entry of a manifest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainRecord {
    pub index: usize,
    pub seed: u64,
    /// Snapshot path relative to the model directory.
    pub snapshot: String,
}

/// Line-oriented description of a model directory.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Manifest {
    pub fields: Vec<(String, String)>,
    pub chains: Vec<ChainRecord>,
}

impl Manifest {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        let value = value.to_string();
        match self.fields.iter_mut().find(|(k, _)| k == key) {
            Some(entry) => entry.1 = value,
            None => self.fields.push((key.to_string(), value)),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("# atm model manifest\n");
        for (k, v) in &self.fields {
            writeln!(out, "{k}={v}").unwrap();
        }
        for c in &self.chains {
            writeln!(
                out,
                "chain={} seed={} snapshot={}",
                c.index, c.seed, c.snapshot
            )
            .unwrap();
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, SnapshotError> {
        let mut m = Manifest::default();
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            if line.starts_with("chain=") {
                let mut index = None;
                let mut seed = None;
                let mut snapshot = None;
                for item in line.split_whitespace() {
                    match item.split_once('=') {
                        Some(("chain", v)) => index = v.parse().ok(),
                        Some(("seed", v)) => seed = v.parse().ok(),
                        Some(("snapshot", v)) => snapshot = Some(v.to_string()),
                        _ => return Err(format_err(lineno, "malformed chain line")),
                    }
                }
                match (index, seed, snapshot) {
                    (Some(index), Some(seed), Some(snapshot)) => m.chains.push(ChainRecord {
                        index,
                        seed,
                        snapshot,
                    }),
                    _ => return Err(format_err(lineno, "malformed chain line")),
                }
            } else {
                let (k, v) = line
                    .split_once('=')
                    .ok_or_else(|| format_err(lineno, "expected key=value"))?;
                m.fields.push((k.to_string(), v.to_string()));
            }
        }
        Ok(m)
    }
}

pub fn snapshot_path(chain: usize, iteration: u64) -> String {
    format!("chain{chain}/iter{iteration}.atm")
}

/// Writes every sample and a manifest into `dir`. `fields` are appended
/// after the model configuration entries.
pub fn save_ensemble(
    dir: &Path,
    samples: &SampleSet,
    base_seed: u64,
    fields: &[(String, String)],
) -> Result<Manifest, SnapshotError> {
    let cfg = samples.config();
    let mut manifest = Manifest::default();
    manifest.set("model", cfg.kind);
    manifest.set("topics", cfg.topics);
    manifest.set("alpha", cfg.hyper.alpha);
    manifest.set("beta", cfg.hyper.beta);
    manifest.set("iterations", samples.samples()[0].state().iteration());
    manifest.set("chains", samples.len());
    manifest.set("base_seed", base_seed);
    for (k, v) in fields {
        manifest.set(k, v);
    }
    for (c, sample) in samples.samples().iter().enumerate() {
        let rel = snapshot_path(c, sample.state().iteration());
        let path = dir.join(&rel);
        let parent = path.parent().expect("snapshot path has a parent");
        fs::create_dir_all(parent).map_err(io_err(parent))?;
        save_snapshot(sample, &path)?;
        manifest.chains.push(ChainRecord {
            index: c,
            seed: sample.state().seed(),
            snapshot: rel,
        });
    }
    let mpath = dir.join("manifest.txt");
    fs::write(&mpath, manifest.to_text()).map_err(io_err(&mpath))?;
    Ok(manifest)
}

pub fn read_manifest(dir: &Path) -> Result<Manifest, SnapshotError> {
    let path = dir.join("manifest.txt");
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    Manifest::parse(&text)
}

/// Loads all chains listed in `dir/manifest.txt`, in chain order.
pub fn load_ensemble(dir: &Path, corpus: &Corpus) -> Result<(Manifest, SampleSet), SnapshotError> {
    let manifest = read_manifest(dir)?;
    let mut records = manifest.chains.clone();
    records.sort_by_key(|c| c.index);
    let samples = records
        .iter()
        .map(|c| load_snapshot(&dir.join(&c.snapshot), corpus))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((manifest, SampleSet::new(samples)?))
}
