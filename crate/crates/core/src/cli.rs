//! The `atm` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error (unreadable or
//! inconsistent input files, unknown ids), 3 runtime error. Tables go to
//! standard output, progress and warnings to standard error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

use crate::analytics::{author_distance_table, author_entropy_table, AnalyticsError, TopicSummary};
use crate::chains::{
    load_ensemble, load_snapshot, read_manifest, run_ensemble_with, save_ensemble, ChainsError,
    EnsembleOptions, Manifest, SampleSet, SnapshotError,
};
use crate::corpus::{split_train_test, AuthorRegistry, Corpus, CorpusError, Document, Vocabulary};
use crate::evaluation::{
    perplexity_curve, rank_authors_for_doc, whole_document_perplexity, EvalError, PerplexityReport,
};
use crate::model::{validate, Hyperparameters, ModelConfig, ModelError, ModelKind};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Runtime(m) => m,
        }
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<SnapshotError> for CliError {
    fn from(e: SnapshotError) -> Self {
        match e {
            SnapshotError::Chains(c) => c.into(),
            e => CliError::Data(e.to_string()),
        }
    }
}

impl From<ChainsError> for CliError {
    fn from(e: ChainsError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::WrongKind(_) => CliError::Usage(e.to_string()),
            e => CliError::Data(e.to_string()),
        }
    }
}

impl From<AnalyticsError> for CliError {
    fn from(e: AnalyticsError) -> Self {
        match e {
            AnalyticsError::WrongKind(_) | AnalyticsError::TopicOutOfRange { .. } => {
                CliError::Usage(e.to_string())
            }
            e => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "atm",
    version,
    about = "Author-topic, LDA and author models by collapsed Gibbs sampling"
)]
pub struct Cli {
    /// Worker threads for chains and per-document evaluation.
    #[arg(long, global = true, env = "ATM_THREADS")]
    pub threads: Option<usize>,
    /// Decimal places for numeric output.
    #[arg(long, global = true, default_value_t = 4)]
    pub precision: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a model and write its snapshots and manifest.
    Train(TrainArgs),
    /// Top words and authors of each topic.
    Topics(TopicsArgs),
    /// Held-out perplexity of test documents.
    Perplexity(PerplexityArgs),
    /// Author pairs ranked by symmetric KL divergence of their topic distributions.
    SimilarAuthors(SimilarArgs),
    /// Authors ranked by the entropy of their topic distributions.
    Entropy(EntropyArgs),
    /// Rank every author as the sole author of a test document.
    RankAuthors(RankArgs),
    /// Check snapshot consistency against its corpus.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct CorpusFiles {
    /// Corpus file: author ids, " | ", token ids, one document per line.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Vocabulary file, one word per line.
    #[arg(long)]
    pub vocab: PathBuf,
    /// Author file, one name per line.
    #[arg(long)]
    pub authors: PathBuf,
}

#[derive(Debug, Args)]
pub struct ModelSource {
    /// Model directory written by `train`.
    #[arg(long, short = 'm')]
    pub model_dir: PathBuf,
    /// Training corpus (default: the one recorded in the manifest).
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    #[arg(long)]
    pub authors: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub files: CorpusFiles,
    /// Output model directory.
    #[arg(long, short = 'o')]
    pub out: PathBuf,
    /// Model kind: at, lda or author.
    #[arg(long = "model", default_value = "at")]
    pub kind: ModelKind,
    /// Number of topics (required for at and lda).
    #[arg(long)]
    pub topics: Option<usize>,
    #[arg(long, default_value_t = 2000)]
    pub iterations: u64,
    #[arg(long, default_value_t = 10)]
    pub chains: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Dirichlet parameter of topic mixtures, or `auto` for 50/T.
    #[arg(long, default_value = "auto")]
    pub alpha: String,
    #[arg(long, default_value_t = 0.01)]
    pub beta: f64,
    /// Hold out this fraction of documents (written to test.txt) before training.
    #[arg(long)]
    pub test_fraction: Option<f64>,
    /// Seed of the train/test split (default: --seed).
    #[arg(long)]
    pub split_seed: Option<u64>,
    /// Report progress every this many iterations.
    #[arg(long, default_value_t = 100)]
    pub progress_every: u64,
    #[arg(long, short)]
    pub quiet: bool,
}

#[derive(Debug, Args)]
pub struct TopicsArgs {
    #[command(flatten)]
    pub source: ModelSource,
    /// Show only this topic.
    #[arg(long)]
    pub topic: Option<usize>,
    #[arg(long, default_value_t = 10)]
    pub top_n: usize,
    /// Chain whose final sample is summarized.
    #[arg(long, default_value_t = 0)]
    pub chain: usize,
}

#[derive(Debug, Args)]
pub struct PerplexityArgs {
    #[command(flatten)]
    pub source: ModelSource,
    /// Test documents in corpus format.
    #[arg(long)]
    pub test: PathBuf,
    /// Comma-separated numbers of observed words to fold in before predicting the rest.
    #[arg(long, value_delimiter = ',')]
    pub fold_in_grid: Option<Vec<usize>>,
    #[arg(long, default_value_t = crate::evaluation::DEFAULT_FOLDIN_SWEEPS)]
    pub fold_in_sweeps: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SimilarArgs {
    #[command(flatten)]
    pub source: ModelSource,
    /// Only authors with more than this many training documents.
    #[arg(long, default_value_t = 5)]
    pub min_papers: usize,
    /// Print at most this many pairs.
    #[arg(long)]
    pub limit: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EntropyArgs {
    #[command(flatten)]
    pub source: ModelSource,
    /// Only authors with more than this many training documents.
    #[arg(long, default_value_t = 0)]
    pub min_papers: usize,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[command(flatten)]
    pub source: ModelSource,
    /// File holding the test document in corpus format.
    #[arg(long)]
    pub test: PathBuf,
    /// Line (0-based, among documents) of the test document in the file.
    #[arg(long, default_value_t = 0)]
    pub doc: usize,
    /// Author id or name whose rank is reported.
    #[arg(long)]
    pub true_author: Option<String>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Model directory; every listed snapshot is checked.
    #[arg(long, short = 'm', conflicts_with = "snapshot")]
    pub model_dir: Option<PathBuf>,
    /// A single snapshot file (needs --corpus, --vocab, --authors).
    #[arg(long)]
    pub snapshot: Option<PathBuf>,
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    #[arg(long)]
    pub authors: Option<PathBuf>,
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
        {
            Ok(pool) => pool.install(|| execute(&cli)),
            Err(e) => Err(CliError::Runtime(e.to_string())),
        },
        None => execute(&cli),
    };
    match result.and_then(|out| {
        io::stdout()
            .lock()
            .write_all(out.as_bytes())
            .map_err(CliError::from)
    }) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("atm: {}", e.message());
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> CliResult<String> {
    let p = cli.precision;
    match &cli.command {
        Command::Train(a) => cmd_train(a, cli.threads),
        Command::Topics(a) => cmd_topics(a, p),
        Command::Perplexity(a) => cmd_perplexity(a, p),
        Command::SimilarAuthors(a) => cmd_similar_authors(a, p),
        Command::Entropy(a) => cmd_entropy(a, p),
        Command::RankAuthors(a) => cmd_rank_authors(a, p),
        Command::Validate(a) => cmd_validate(a),
    }
}

fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn sha256_file(path: &Path) -> CliResult<String> {
    let bytes = fs::read(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn with_path<T>(path: &Path, r: Result<T, CorpusError>) -> CliResult<T> {
    r.map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn load_lexicons(vocab: &Path, authors: &Path) -> CliResult<(Vocabulary, AuthorRegistry)> {
    Ok((
        with_path(vocab, Vocabulary::parse(open(vocab)?))?,
        with_path(authors, AuthorRegistry::parse(open(authors)?))?,
    ))
}

fn load_corpus(corpus: &Path, vocab: &Path, authors: &Path) -> CliResult<Corpus> {
    let (v, a) = load_lexicons(vocab, authors)?;
    with_path(corpus, Corpus::parse(open(corpus)?, v, a))
}

fn absolute(path: &Path) -> PathBuf {
    fs::canonicalize(path).unwrap_or_else(|_| path.to_path_buf())
}

fn warn_unused(corpus: &Corpus) {
    let unused = corpus.unused_authors();
    if !unused.is_empty() {
        eprintln!(
            "warning: {} author(s) have no documents: {:?}",
            unused.len(),
            unused
        );
    }
}

fn cmd_train(a: &TrainArgs, threads: Option<usize>) -> CliResult<String> {
    let topics = a.topics.unwrap_or(0);
    let config = if a.alpha == "auto" {
        ModelConfig::with_defaults(a.kind, topics)
    } else {
        let alpha: f64 = a.alpha.parse().map_err(|_| {
            CliError::Usage(format!(
                "--alpha must be a number or `auto`, got {:?}",
                a.alpha
            ))
        })?;
        Hyperparameters::new(alpha, a.beta).and_then(|h| ModelConfig::new(a.kind, topics, h))
    }
    .map_err(|e: ModelError| CliError::Usage(e.to_string()))?;
    let config = ModelConfig {
        hyper: Hyperparameters::new(config.hyper.alpha, a.beta)
            .map_err(|e| CliError::Usage(e.to_string()))?,
        ..config
    };
    if a.chains == 0 {
        return Err(CliError::Usage("--chains must be at least 1".into()));
    }

    let full = load_corpus(&a.files.corpus, &a.files.vocab, &a.files.authors)?;
    warn_unused(&full);
    fs::create_dir_all(&a.out)?;
    let mut fields: Vec<(String, String)> = vec![
        (
            "command".into(),
            std::env::args().collect::<Vec<_>>().join(" "),
        ),
        ("tool_version".into(), env!("CARGO_PKG_VERSION").into()),
        (
            "vocab".into(),
            absolute(&a.files.vocab).display().to_string(),
        ),
        ("vocab_sha256".into(), sha256_file(&a.files.vocab)?),
        (
            "authors".into(),
            absolute(&a.files.authors).display().to_string(),
        ),
        ("authors_sha256".into(), sha256_file(&a.files.authors)?),
    ];
    let corpus = match a.test_fraction {
        None => {
            fields.push((
                "corpus".into(),
                absolute(&a.files.corpus).display().to_string(),
            ));
            fields.push(("corpus_sha256".into(), sha256_file(&a.files.corpus)?));
            full
        }
        Some(frac) => {
            let split_seed = a.split_seed.unwrap_or(a.seed);
            let split = split_train_test(&full, frac, split_seed).map_err(|e| match e {
                CorpusError::BadFraction(_) => CliError::Usage(e.to_string()),
                e => CliError::Data(e.to_string()),
            })?;
            if split.is_short() {
                eprintln!(
                    "warning: author coverage allowed only {} of {} requested test documents",
                    split.test.num_documents(),
                    split.requested_test
                );
            }
            let train_path = a.out.join("train.txt");
            let test_path = a.out.join("test.txt");
            fs::write(&train_path, split.train.serialize())?;
            fs::write(&test_path, split.test.serialize())?;
            fields.push((
                "source_corpus".into(),
                absolute(&a.files.corpus).display().to_string(),
            ));
            fields.push(("source_corpus_sha256".into(), sha256_file(&a.files.corpus)?));
            fields.push(("test_fraction".into(), frac.to_string()));
            fields.push(("split_seed".into(), split_seed.to_string()));
            fields.push((
                "test_documents".into(),
                split.test.num_documents().to_string(),
            ));
            fields.push(("corpus".into(), "train.txt".into()));
            fields.push(("corpus_sha256".into(), sha256_file(&train_path)?));
            fields.push(("test".into(), "test.txt".into()));
            split.train
        }
    };

    let tokens = corpus.total_tokens() as f64;
    let every = a.progress_every.max(1);
    let last = Mutex::new(vec![(0u64, Instant::now()); a.chains]);
    let progress = |c: usize, it: u64| {
        if a.quiet || (!it.is_multiple_of(every) && it != a.iterations) {
            return;
        }
        let mut last = last.lock().unwrap();
        let (prev, at) = last[c];
        let now = Instant::now();
        let rate = (it - prev) as f64 * tokens / now.duration_since(at).as_secs_f64().max(1e-9);
        last[c] = (it, now);
        eprintln!(
            "chain {c}\titeration {it}/{}\ttokens/sec {rate:.0}",
            a.iterations
        );
    };
    let options = EnsembleOptions {
        threads,
        progress: Some(&progress),
    };
    let samples = run_ensemble_with(&corpus, config, a.seed, a.chains, a.iterations, &options)
        .map_err(|e| match e {
            ChainsError::Sampler(crate::sampler::SamplerError::Model(
                m @ ModelError::EmptyCorpus,
            )) => CliError::Data(m.to_string()),
            e => e.into(),
        })?;
    let manifest = save_ensemble(&a.out, &samples, a.seed, &fields)?;
    if !a.quiet {
        eprintln!(
            "wrote {} snapshot(s) to {}",
            manifest.chains.len(),
            a.out.display()
        );
    }
    Ok(String::new())
}

fn resolve(dir: &Path, recorded: &str) -> PathBuf {
    let p = PathBuf::from(recorded);
    if p.is_absolute() {
        p
    } else {
        dir.join(p)
    }
}

/// Loads the training corpus of a model directory and all of its samples.
fn open_model(src: &ModelSource) -> CliResult<(Manifest, Corpus, SampleSet)> {
    let manifest = read_manifest(&src.model_dir)?;
    let corpus = corpus_for(src, &manifest, true)?;
    let (manifest, samples) = load_ensemble(&src.model_dir, &corpus)?;
    Ok((manifest, corpus, samples))
}

/// Training corpus of a model: explicit paths win, otherwise the paths in
/// the manifest, optionally checked against their recorded digests.
fn corpus_for(src: &ModelSource, manifest: &Manifest, check_digests: bool) -> CliResult<Corpus> {
    let pick = |given: &Option<PathBuf>, key: &str| -> CliResult<PathBuf> {
        if let Some(p) = given {
            return Ok(p.clone());
        }
        let recorded = manifest.get(key).ok_or_else(|| {
            CliError::Data(format!("manifest has no `{key}` entry; pass --{key}"))
        })?;
        let path = resolve(&src.model_dir, recorded);
        if let (true, Some(digest)) = (check_digests, manifest.get(&format!("{key}_sha256"))) {
            if sha256_file(&path)? != digest {
                return Err(CliError::Data(format!(
                    "{} changed since training",
                    path.display()
                )));
            }
        }
        Ok(path)
    };
    load_corpus(
        &pick(&src.corpus, "corpus")?,
        &pick(&src.vocab, "vocab")?,
        &pick(&src.authors, "authors")?,
    )
}

fn load_test(path: &Path, corpus: &Corpus) -> CliResult<Vec<Document>> {
    let test = with_path(
        path,
        Corpus::parse(
            open(path)?,
            corpus.vocabulary.clone(),
            corpus.authors.clone(),
        ),
    )?;
    Ok(test.documents)
}

fn cmd_topics(a: &TopicsArgs, p: usize) -> CliResult<String> {
    let (_, corpus, samples) = open_model(&a.source)?;
    if !samples.kind().has_topics() {
        return Err(CliError::Usage(format!(
            "{} models have no topics",
            samples.kind()
        )));
    }
    let sample = samples.samples().get(a.chain).ok_or_else(|| {
        CliError::Usage(format!(
            "chain {} out of range ({} chains)",
            a.chain,
            samples.len()
        ))
    })?;
    let topics: Vec<usize> = match a.topic {
        Some(j) => vec![j],
        None => (0..samples.num_topics()).collect(),
    };
    let mut out = String::new();
    for j in topics {
        out.push_str(&TopicSummary::from_sample(sample, &corpus, j, a.top_n)?.to_block(p));
    }
    Ok(out)
}

fn report_rows(out: &mut String, r: &PerplexityReport, p: usize) {
    for d in &r.docs {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{:.p$}",
            d.doc, d.n_tokens, d.n_train, d.n_heldout, r.samples, d.perplexity
        )
        .unwrap();
    }
    writeln!(
        out,
        "mean\t-\t{}\t-\t{}\t{:.p$}",
        r.n_train, r.samples, r.mean
    )
    .unwrap();
    if r.clamped > 0 {
        eprintln!(
            "note: {} document(s) folded in fewer than {} words",
            r.clamped, r.n_train
        );
    }
    if r.skipped > 0 {
        eprintln!("note: skipped {} empty document(s)", r.skipped);
    }
}

fn cmd_perplexity(a: &PerplexityArgs, p: usize) -> CliResult<String> {
    let (_, corpus, samples) = open_model(&a.source)?;
    let test = load_test(&a.test, &corpus)?;
    let mut out = String::from("doc\tn_tokens\tn_train\tn_heldout\tS\tperplexity\n");
    match &a.fold_in_grid {
        None => report_rows(&mut out, &whole_document_perplexity(&samples, &test)?, p),
        Some(grid) => {
            for r in perplexity_curve(&samples, &test, grid, a.fold_in_sweeps, a.seed)? {
                report_rows(&mut out, &r, p);
            }
        }
    }
    Ok(out)
}

fn author_name(corpus: &Corpus, id: usize) -> &str {
    corpus.authors.name(id).unwrap_or("?")
}

fn cmd_similar_authors(a: &SimilarArgs, p: usize) -> CliResult<String> {
    let (_, corpus, samples) = open_model(&a.source)?;
    let table = author_distance_table(&samples, a.min_papers, &corpus)?;
    let mut out = String::from("author_i\tauthor_j\tskl\tn_common\tn_i\tn_j\n");
    for d in table.iter().take(a.limit.unwrap_or(usize::MAX)) {
        writeln!(
            out,
            "{}\t{}\t{:.p$}\t{}\t{}\t{}",
            author_name(&corpus, d.i),
            author_name(&corpus, d.j),
            d.value,
            d.n_common,
            d.n_i,
            d.n_j
        )
        .unwrap();
    }
    Ok(out)
}

fn cmd_entropy(a: &EntropyArgs, p: usize) -> CliResult<String> {
    let (_, corpus, samples) = open_model(&a.source)?;
    let mut out = String::from("author\tentropy\tn\n");
    for e in author_entropy_table(&samples, a.min_papers, &corpus)? {
        writeln!(
            out,
            "{}\t{:.p$}\t{}",
            author_name(&corpus, e.author),
            e.entropy,
            e.n_papers
        )
        .unwrap();
    }
    Ok(out)
}

fn cmd_rank_authors(a: &RankArgs, p: usize) -> CliResult<String> {
    let (_, corpus, samples) = open_model(&a.source)?;
    let test = load_test(&a.test, &corpus)?;
    let doc = test
        .get(a.doc)
        .ok_or_else(|| CliError::Data(format!("{} has no document {}", a.test.display(), a.doc)))?;
    let true_author = match &a.true_author {
        None => None,
        Some(s) => Some(
            s.parse::<usize>()
                .ok()
                .filter(|&k| k < corpus.num_authors())
                .or_else(|| corpus.authors.id(s))
                .ok_or_else(|| CliError::Data(format!("unknown author {s:?}")))?,
        ),
    };
    let ranking = rank_authors_for_doc(&samples, &doc.tokens, true_author.unwrap_or(0))?;
    let mut out = String::new();
    if let Some(k) = true_author {
        writeln!(out, "rank\t{}\t{}", ranking.rank, author_name(&corpus, k)).unwrap();
    }
    out.push_str("rank\tauthor\tperplexity\n");
    for (i, (k, perp)) in ranking.table.iter().enumerate() {
        writeln!(out, "{}\t{}\t{:.p$}", i + 1, author_name(&corpus, *k), perp).unwrap();
    }
    Ok(out)
}

fn cmd_validate(a: &ValidateArgs) -> CliResult<String> {
    let mut out = String::new();
    let mut bad = 0;
    let mut check = |path: &Path, corpus: &Corpus| -> CliResult<()> {
        match load_snapshot(path, corpus) {
            Ok(sample) => {
                debug_assert!(validate(sample.state(), corpus).is_empty());
                writeln!(out, "ok\t{}", path.display()).unwrap();
            }
            Err(SnapshotError::Invalid(v)) => {
                bad += 1;
                writeln!(out, "invalid\t{}\t{} violation(s)", path.display(), v.len()).unwrap();
                for violation in v {
                    writeln!(out, "\t{violation:?}").unwrap();
                }
            }
            Err(e @ SnapshotError::Io { .. }) => return Err(e.into()),
            Err(e) => {
                bad += 1;
                writeln!(out, "invalid\t{}\t{e}", path.display()).unwrap();
            }
        }
        Ok(())
    };
    match (&a.model_dir, &a.snapshot) {
        (Some(dir), None) => {
            let source = ModelSource {
                model_dir: dir.clone(),
                corpus: a.corpus.clone(),
                vocab: a.vocab.clone(),
                authors: a.authors.clone(),
            };
            let manifest = read_manifest(dir)?;
            let corpus = corpus_for(&source, &manifest, false)?;
            for c in &manifest.chains {
                check(&dir.join(&c.snapshot), &corpus)?;
            }
        }
        (None, Some(snapshot)) => {
            let (Some(c), Some(v), Some(au)) = (&a.corpus, &a.vocab, &a.authors) else {
                return Err(CliError::Usage(
                    "--snapshot needs --corpus, --vocab and --authors".into(),
                ));
            };
            check(snapshot, &load_corpus(c, v, au)?)?;
        }
        _ => return Err(CliError::Usage("give --model-dir or --snapshot".into())),
    }
    if bad > 0 {
        print!("{out}");
        return Err(CliError::Data(format!("{bad} invalid snapshot(s)")));
    }
    Ok(out)
}
