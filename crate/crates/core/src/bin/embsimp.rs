//! Command-line entry point.
//!
//! Exit codes: 0 success, 1 usage error, 2 runtime error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{error::ErrorKind, Args, CommandFactory, Parser, Subcommand, ValueEnum};

use embsimp::corpus::{
    first_reference, load_multi_ref, load_parallel_tsv, load_sentences, split_corpus, Lang,
    MultiRefCorpus, ParallelCorpus, Sentence,
};
use embsimp::embedding::{encode_emb1, read_embeddings};
use embsimp::experiments::{
    evaluate_outputs, render_report, run_multilingual, run_reconstruction, run_simplification,
    write_atomic, CoderHandle, ExperimentOutput, ExternalCommand, ReportFormat,
};
use embsimp::metrics::merge_external_scores;
use embsimp::simplifier::{encode_mlp1, train, TrainingConfig};
use embsimp::toy_coder::ToyCoderConfig;

const DEFAULT_SEED: u64 = 42;

#[derive(Parser)]
#[command(
    name = "embsimp",
    version,
    about = "Embedding-space sentence simplification toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a sentence file (one per line) into an EMB1 matrix.
    Encode(EncodeArgs),
    /// Decode an EMB1 matrix into a sentence file.
    Decode(DecodeArgs),
    /// Train the embedding-space MLP on aligned EMB1 files.
    Train(TrainArgs),
    /// Split a TSV pair corpus into seeded train and validation parts.
    Split(SplitArgs),
    /// Run an experiment and write a report plus decoded texts.
    #[command(subcommand)]
    Run(RunCommand),
}

#[derive(Clone, Copy, ValueEnum)]
enum CoderChoice {
    Toy,
    External,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatChoice {
    Markdown,
    Csv,
}

impl From<FormatChoice> for ReportFormat {
    fn from(f: FormatChoice) -> Self {
        match f {
            FormatChoice::Markdown => ReportFormat::Markdown,
            FormatChoice::Csv => ReportFormat::Csv,
        }
    }
}

#[derive(Args, Clone)]
struct CoderArgs {
    /// Which coder to use.
    #[arg(long, value_enum, default_value = "toy")]
    coder: CoderChoice,
    /// External coder program and leading arguments (whitespace-separated).
    #[arg(long, required_if_eq("coder", "external"))]
    coder_cmd: Option<String>,
    /// Language tag passed to the coder, e.g. eng_Latn.
    #[arg(long, default_value = "eng_Latn")]
    lang: String,
    /// Toy coder hash seed.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Toy coder embedding width.
    #[arg(long, default_value_t = 1024)]
    dim: usize,
    /// Toy coder character n-gram order.
    #[arg(long, default_value_t = 3)]
    ngram_order: usize,
}

impl CoderArgs {
    fn lang(&self) -> Lang {
        Lang::new(&self.lang)
    }

    fn toy_config(&self) -> ToyCoderConfig {
        ToyCoderConfig {
            dim: self.dim,
            seed: self.seed,
            ngram_order: self.ngram_order,
        }
    }

    fn handle(&self, pool: Option<Vec<Sentence>>) -> Result<CoderHandle> {
        Ok(match self.coder {
            CoderChoice::Toy => match pool {
                Some(p) => CoderHandle::toy_with_pool(self.toy_config(), p, self.lang()),
                None => CoderHandle::toy(self.toy_config(), self.lang()),
            },
            CoderChoice::External => {
                let spec = self
                    .coder_cmd
                    .as_deref()
                    .context("--coder-cmd is required")?;
                CoderHandle::external(ExternalCommand::parse(spec)?, self.lang())
            }
        })
    }
}

#[derive(Args)]
struct EncodeArgs {
    #[command(flatten)]
    coder: CoderArgs,
    /// Sentence file, one sentence per line.
    #[arg(long = "in")]
    input: PathBuf,
    /// EMB1 output file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DecodeArgs {
    #[command(flatten)]
    coder: CoderArgs,
    /// EMB1 input file.
    #[arg(long = "in")]
    input: PathBuf,
    /// Sentence output file.
    #[arg(long)]
    out: PathBuf,
    /// Retrieval pool (sentence file); required for the toy coder.
    #[arg(long)]
    pool: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    /// Complex-side training embeddings.
    #[arg(long)]
    train_src: PathBuf,
    /// Simple-side training embeddings, row-aligned with --train-src.
    #[arg(long)]
    train_tgt: PathBuf,
    /// Complex-side validation embeddings.
    #[arg(long)]
    val_src: PathBuf,
    /// Simple-side validation embeddings.
    #[arg(long)]
    val_tgt: PathBuf,
    /// Hidden layer width K.
    #[arg(long)]
    hidden: usize,
    /// Adam learning rate.
    #[arg(long, default_value_t = 0.001)]
    lr: f64,
    /// Maximum number of full passes over the training data.
    #[arg(long, default_value_t = 10_000)]
    max_epochs: usize,
    /// Epochs between validation checkpoints.
    #[arg(long, default_value_t = 50)]
    checkpoint_interval: usize,
    /// Consecutive checkpoint-to-checkpoint validation increases before stopping.
    #[arg(long, default_value_t = 5)]
    patience: usize,
    /// Mini-batch size.
    #[arg(long, default_value_t = 256)]
    batch_size: usize,
    /// Seed for weight init and batch order.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Model output file (MLP1).
    #[arg(long)]
    out: PathBuf,
    /// Training log (JSON Lines); defaults to <out>.log.jsonl.
    #[arg(long)]
    log: Option<PathBuf>,
}

#[derive(Args)]
struct SplitArgs {
    /// TSV pair corpus.
    #[arg(long = "in")]
    input: PathBuf,
    /// Number of pairs held out for validation.
    #[arg(long)]
    validation_size: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value = "eng_Latn")]
    lang: String,
    /// Directory for train/val TSV and per-side sentence files.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Output directory for the report and decoded texts.
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, value_enum, default_value = "markdown")]
    format: FormatChoice,
    /// Precomputed scores to merge (JSON Lines with metric/value fields).
    #[arg(long)]
    scores: Option<PathBuf>,
}

#[derive(Args)]
#[group(id = "data", required = true, multiple = false)]
struct DataArgs {
    /// TSV pair corpus (complex<TAB>simple).
    #[arg(long, group = "data")]
    pairs: Option<PathBuf>,
    /// JSON Lines multi-reference corpus ({"src":..., "refs":[...]}).
    #[arg(long, group = "data")]
    multi_ref: Option<PathBuf>,
}

impl DataArgs {
    fn load(&self, lang: &Lang) -> Result<MultiRefCorpus> {
        if let Some(p) = &self.pairs {
            Ok(MultiRefCorpus::from(&load_parallel_tsv(p, lang)?))
        } else if let Some(p) = &self.multi_ref {
            Ok(load_multi_ref(p, lang)?)
        } else {
            bail!("one of --pairs or --multi-ref is required")
        }
    }

    fn load_pairs(&self, lang: &Lang) -> Result<ParallelCorpus> {
        match &self.pairs {
            Some(p) => Ok(load_parallel_tsv(p, lang)?),
            None => Ok(first_reference(&self.load(lang)?)),
        }
    }
}

#[derive(Args)]
struct SimplifyArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Trained MLP1 model.
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    coder: CoderArgs,
    /// Toy decode pool (sentence file); defaults to every reference sentence.
    #[arg(long)]
    pool: Option<PathBuf>,
    #[command(flatten)]
    report: ReportArgs,
}

#[derive(Subcommand)]
enum RunCommand {
    /// Encode then decode both sides of a corpus and compare readability.
    Reconstruct {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        coder: CoderArgs,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Encode, transform with the model, decode, and score against references.
    Simplify(SimplifyArgs),
    /// Simplify with a non-English language tag; English-only metrics are dropped.
    Multilingual(SimplifyArgs),
    /// Score an existing system-output file against sources and references.
    Evaluate {
        #[command(flatten)]
        data: DataArgs,
        /// System outputs, one per source line.
        #[arg(long)]
        outputs: PathBuf,
        #[arg(long, default_value = "eng_Latn")]
        lang: String,
        #[command(flatten)]
        report: ReportArgs,
    },
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    write_atomic(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn cmd_encode(a: &EncodeArgs) -> Result<()> {
    let lang = a.coder.lang();
    let sentences = load_sentences(&a.input, &lang)?;
    let coder = a.coder.handle(None)?;
    let work = tempfile::tempdir()?;
    let m = coder.encode(&sentences, work.path())?;
    write_bytes(&a.out, &encode_emb1(&m)?)?;
    eprintln!("encoded {} sentences (dim {})", m.rows(), m.dim());
    Ok(())
}

fn cmd_decode(a: &DecodeArgs) -> Result<()> {
    let lang = a.coder.lang();
    let m = read_embeddings(&a.input)?.with_lang(lang.clone());
    let pool = a
        .pool
        .as_ref()
        .map(|p| load_sentences(p, &lang))
        .transpose()?;
    let coder = a.coder.handle(pool)?;
    let work = tempfile::tempdir()?;
    let out = coder.decode(&m, &[], work.path())?;
    write_bytes(
        &a.out,
        embsimp::corpus::sentences_to_string(&out).as_bytes(),
    )?;
    eprintln!("decoded {} rows", out.len());
    Ok(())
}

fn cmd_train(a: &TrainArgs) -> Result<()> {
    let cfg = TrainingConfig {
        learning_rate: a.lr,
        max_epochs: a.max_epochs,
        checkpoint_interval: a.checkpoint_interval,
        patience: a.patience,
        batch_size: a.batch_size,
        seed: a.seed,
        ..Default::default()
    };
    let load = |p: &PathBuf| read_embeddings(p).with_context(|| format!("reading {}", p.display()));
    let (ts, tt, vs, vt) = (
        load(&a.train_src)?,
        load(&a.train_tgt)?,
        load(&a.val_src)?,
        load(&a.val_tgt)?,
    );
    let dim = ts.dim();
    let (model, log) = train((&ts, &tt), (&vs, &vt), &cfg, dim, a.hidden)?;
    let log_path = a.log.clone().unwrap_or_else(|| {
        let mut p = a.out.clone().into_os_string();
        p.push(".log.jsonl");
        PathBuf::from(p)
    });
    write_bytes(&a.out, &encode_mlp1(&model))?;
    write_bytes(&log_path, log.to_jsonl().as_bytes())?;
    println!("params: {}", log.param_count);
    println!(
        "stopped: {:?} at epoch {} (best epoch {})",
        log.stop_reason, log.stopped_at, log.best_epoch
    );
    println!("final validation loss: {:.6e}", log.final_loss);
    Ok(())
}

fn cmd_split(a: &SplitArgs) -> Result<()> {
    let corpus = load_parallel_tsv(&a.input, &Lang::new(&a.lang))?;
    let (train, val) = split_corpus(&corpus, a.validation_size, a.seed)?;
    std::fs::create_dir_all(&a.out_dir)?;
    for (name, part) in [("train", &train), ("val", &val)] {
        let tsv: String = part
            .pairs()
            .iter()
            .map(|p| format!("{}\t{}\n", p.complex.text(), p.simple.text()))
            .collect();
        write_bytes(&a.out_dir.join(format!("{name}.tsv")), tsv.as_bytes())?;
        let complex = embsimp::corpus::sentences_to_string(&part.complex());
        let simple = embsimp::corpus::sentences_to_string(&part.simple());
        write_bytes(
            &a.out_dir.join(format!("{name}.complex.txt")),
            complex.as_bytes(),
        )?;
        write_bytes(
            &a.out_dir.join(format!("{name}.simple.txt")),
            simple.as_bytes(),
        )?;
    }
    for (k, v) in &train.metadata {
        println!("{k}: {v}");
    }
    println!("train: {}, val: {}", train.len(), val.len());
    Ok(())
}

fn finish(mut out: ExperimentOutput, r: &ReportArgs) -> Result<()> {
    if let Some(scores) = &r.scores {
        out.report = merge_external_scores(out.report, scores)?;
    }
    let path = out.persist(&r.out_dir, r.format.into())?;
    print!("{}", render_report(&out.report, r.format.into()));
    eprintln!("report written to {}", path.display());
    Ok(())
}

fn load_pool(path: &Option<PathBuf>, lang: &Lang) -> Result<Option<Vec<Sentence>>> {
    Ok(path.as_ref().map(|p| load_sentences(p, lang)).transpose()?)
}

fn cmd_run(cmd: &RunCommand) -> Result<()> {
    match cmd {
        RunCommand::Reconstruct {
            data,
            coder,
            report,
        } => {
            let corpus = data.load_pairs(&coder.lang())?;
            let out = run_reconstruction(&corpus, &coder.handle(None)?)?;
            finish(out, report)
        }
        RunCommand::Simplify(a) => {
            let lang = a.coder.lang();
            let corpus = data_name(&a.data, a.data.load(&lang)?);
            let coder = a.coder.handle(load_pool(&a.pool, &lang)?)?;
            let out = run_simplification(
                &corpus.0,
                corpus.1.sources(),
                corpus.1.refs(),
                &a.model,
                &coder,
            )?;
            finish(out, &a.report)
        }
        RunCommand::Multilingual(a) => {
            let lang = a.coder.lang();
            let corpus = data_name(&a.data, a.data.load(&lang)?);
            let coder = a.coder.handle(load_pool(&a.pool, &lang)?)?;
            let out = run_multilingual(
                &corpus.0,
                corpus.1.sources(),
                corpus.1.refs(),
                &a.model,
                &coder,
                &lang,
            )?;
            finish(out, &a.report)
        }
        RunCommand::Evaluate {
            data,
            outputs,
            lang,
            report,
        } => {
            let lang = Lang::new(lang);
            let (name, corpus) = data_name(data, data.load(&lang)?);
            let outs = load_sentences(outputs, &lang)?;
            let mut rep = evaluate_outputs(&name, corpus.sources(), &outs, corpus.refs(), &lang)?;
            rep.provenance = vec![
                ("experiment".into(), "evaluation".into()),
                ("corpus".into(), name.clone()),
                ("outputs".into(), outputs.display().to_string()),
                ("lang".into(), lang.to_string()),
            ];
            let out = ExperimentOutput {
                report: rep,
                texts: vec![],
            };
            finish(out, report)
        }
    }
}

fn data_name(d: &DataArgs, corpus: MultiRefCorpus) -> (String, MultiRefCorpus) {
    let path = d.pairs.as_ref().or(d.multi_ref.as_ref());
    let name = path
        .and_then(|p| p.file_stem())
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| corpus.name().to_string());
    (name, corpus)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Command::Decode(a) = &cli.command {
        if matches!(a.coder.coder, CoderChoice::Toy) && a.pool.is_none() {
            let e = Cli::command().error(
                ErrorKind::MissingRequiredArgument,
                "--pool is required with the toy coder",
            );
            let _ = e.print();
            return ExitCode::from(1);
        }
    }
    let result = match &cli.command {
        Command::Encode(a) => cmd_encode(a),
        Command::Decode(a) => cmd_decode(a),
        Command::Train(a) => cmd_train(a),
        Command::Split(a) => cmd_split(a),
        Command::Run(r) => cmd_run(r),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
