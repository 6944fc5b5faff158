use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use mare::artifact::{Model, ModelArtifact};
use mare::assembler::AssemblyConfig;
use mare::convert::convert_smartdata;
use mare::corpus::{binary_subset, corpus_stats, read_corpus_file, validate_document, write_corpus_file, CorpusStats, Document, Schema, Violation};
use mare::crf::{self, TrainConfig};
use mare::eval::{evaluate, relations_by_doc, EvalConfig, Strategy};
use mare::pipeline::{predict_corpus, predictions_by_doc, read_predictions, span_dump, write_jsonl, PredictOptions};
use mare::span::{self, SpanTrainConfig};
use mare::synth::{generate, SynthConfig};

#[derive(Parser)]
#[command(name = "mare", version, about = "Multi-attribute relation extraction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a sequence tagger or span labeler and write the model artifact.
    Train(TrainArgs),
    /// Extract relations from a corpus with a trained model.
    Predict(PredictArgs),
    /// Score predicted relations against gold relations.
    Eval(EvalArgs),
    /// Corpus statistics for one or more splits.
    Stats(StatsArgs),
    /// Generate a synthetic corpus and its schema.
    Synth(SynthArgs),
    /// Convert a SmartData JSON-lines export to the native corpus format.
    Convert(ConvertArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Approach {
    /// Linear-chain CRF over the b/i/o tag scheme.
    Seq,
    /// Attention-pooled span labeler.
    Span,
}

/// Run configuration file. Every field is optional; command-line flags win.
#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
struct RunConfig {
    approach: Option<Approach>,
    corpus: Option<PathBuf>,
    schema: Option<PathBuf>,
    model: Option<PathBuf>,
    predictions: Option<PathBuf>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    crf: Option<TrainConfig>,
    span: Option<SpanTrainConfig>,
    assembly: Option<AssemblyConfig>,
    threshold: Option<f64>,
    strategies: Option<Vec<Strategy>>,
    exclude_triggers: Option<bool>,
}

impl RunConfig {
    fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config `{}`", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("invalid config `{}`", path.display()))
    }
}

#[derive(Args)]
struct Common {
    /// Run configuration (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Schema (JSON).
    #[arg(long)]
    schema: Option<PathBuf>,
    /// Corpus (JSON lines).
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Output file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum)]
    approach: Option<Approach>,
    /// Where to write the model artifact (defaults to --out).
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    max_span_width: Option<usize>,
}

#[derive(Args)]
struct PredictArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    model: Option<PathBuf>,
    /// Span labeler decision threshold (inclusive).
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    max_relation_width: Option<usize>,
    /// Also write raw span labeler output here.
    #[arg(long)]
    spans_out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    common: Common,
    /// Prediction file written by `predict`.
    #[arg(long)]
    predictions: Option<PathBuf>,
    /// Comma-separated subset of ar,cl,mre,cre,bre.
    #[arg(long)]
    strategy: Option<String>,
    /// Remove trigger attributes from both sides before scoring.
    #[arg(long)]
    exclude_triggers: bool,
    /// Row label of the printed table.
    #[arg(long, default_value = "MARE")]
    name: String,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    schema: Option<PathBuf>,
    /// One or more corpus splits.
    #[arg(long, num_args = 1..)]
    corpus: Vec<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    /// Generator configuration (JSON); defaults apply to missing fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Corpus output.
    #[arg(long)]
    out: PathBuf,
    /// Schema output.
    #[arg(long)]
    schema: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    max_relation_width: Option<usize>,
}

#[derive(Args)]
struct ConvertArgs {
    /// SmartData JSON-lines file.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn pick(flag: Option<PathBuf>, config: Option<PathBuf>, what: &str) -> Result<PathBuf> {
    flag.or(config).with_context(|| format!("no {what} given (use --{what} or the config file)"))
}

fn load_schema(path: &Path) -> Result<Schema> {
    Schema::load(path).with_context(|| format!("cannot load schema `{}`", path.display()))
}

fn load_corpus(path: &Path) -> Result<Vec<Document>> {
    read_corpus_file(path).with_context(|| format!("cannot load corpus `{}`", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("cannot create `{}`", path.display()))?))
}

/// Unknown labels and roles stop training; entity-level findings are reported.
fn check_corpus(corpus: &[Document], schema: &Schema) -> Result<()> {
    let mut fatal = Vec::new();
    let mut warnings = 0;
    for doc in corpus {
        for v in validate_document(doc, schema) {
            match v {
                Violation::UnknownLabel { .. } | Violation::UnknownRole { .. } => fatal.push(format!("{}: {v}", doc.id)),
                _ => warnings += 1,
            }
        }
    }
    if warnings > 0 {
        eprintln!("warning: {warnings} attribute(s) lack a compatible entity annotation");
    }
    if !fatal.is_empty() {
        let shown: Vec<_> = fatal.iter().take(5).cloned().collect();
        bail!(
            "corpus does not match the schema ({} problem(s)):\n  {}",
            fatal.len(),
            shown.join("\n  ")
        );
    }
    Ok(())
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let cfg = RunConfig::load(args.common.config.as_deref())?;
    let approach = args.approach.or(cfg.approach).context("no approach given (use --approach seq|span)")?;
    let schema = load_schema(&pick(args.common.schema, cfg.schema, "schema")?)?;
    let corpus = load_corpus(&pick(args.common.corpus, cfg.corpus, "corpus")?)?;
    let out = args
        .model
        .or(args.common.out)
        .or(cfg.model)
        .context("no model output given (use --model or --out)")?;
    check_corpus(&corpus, &schema)?;

    let started = Instant::now();
    let mut last = f64::NAN;
    let log = |epoch: usize, loss: f64| {
        eprintln!("epoch {:>3}  loss {loss:.6}", epoch + 1);
        last = loss;
    };
    let model = match approach {
        Approach::Seq => {
            let mut c = cfg.crf.unwrap_or_default();
            if let Some(s) = args.seed.or(cfg.seed) {
                c.seed = s;
            }
            if let Some(e) = args.epochs {
                c.epochs = e;
            }
            Model::Crf(crf::train_with_log(&corpus, &schema, &c, log)?)
        }
        Approach::Span => {
            let mut c = cfg.span.unwrap_or_default();
            if let Some(s) = args.seed.or(cfg.seed) {
                c.seed = s;
            }
            if let Some(e) = args.epochs {
                c.epochs = e;
            }
            if let Some(w) = args.max_span_width {
                c.max_span_width = w;
            }
            if let Some(t) = cfg.threshold {
                c.threshold = t;
            }
            Model::Span(span::train_with_log(&corpus, &schema, &c, log)?)
        }
    };
    ModelArtifact::new(model)
        .save(&out)
        .with_context(|| format!("cannot write model `{}`", out.display()))?;
    eprintln!(
        "trained {} model on {} documents: final loss {last:.6}, {:.1}s, written to {}",
        match approach {
            Approach::Seq => "sequence tagging",
            Approach::Span => "span labeling",
        },
        corpus.len(),
        started.elapsed().as_secs_f64(),
        out.display()
    );
    Ok(())
}

fn cmd_predict(args: PredictArgs) -> Result<()> {
    let cfg = RunConfig::load(args.common.config.as_deref())?;
    let schema = load_schema(&pick(args.common.schema, cfg.schema, "schema")?)?;
    let corpus = load_corpus(&pick(args.common.corpus, cfg.corpus, "corpus")?)?;
    let model_path = pick(args.model, cfg.model, "model")?;
    let out = pick(args.common.out, cfg.predictions.or(cfg.out), "out")?;
    let artifact = ModelArtifact::load(&model_path).with_context(|| format!("cannot load model `{}`", model_path.display()))?;

    let mut assembly = cfg.assembly.unwrap_or_default();
    if let Some(w) = args.max_relation_width {
        assembly.max_relation_width = w;
    }
    let options = PredictOptions {
        threshold: args.threshold.or(cfg.threshold),
        assembly,
    };
    let records = predict_corpus(&artifact.model, &schema, &corpus, &options)?;
    write_jsonl(create(&out)?, &records)?;
    if let Some(path) = args.spans_out {
        let Model::Span(m) = &artifact.model else {
            bail!("--spans-out needs a span labeling model");
        };
        let dump = span_dump(m, &schema, &corpus, options.threshold.unwrap_or(m.threshold))?;
        write_jsonl(create(&path)?, &dump)?;
    }
    let relations: usize = records.iter().map(|r| r.relations.len()).sum();
    eprintln!("{} documents, {relations} relations written to {}", records.len(), out.display());
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let cfg = RunConfig::load(args.common.config.as_deref())?;
    let schema = load_schema(&pick(args.common.schema, cfg.schema, "schema")?)?;
    let gold = load_corpus(&pick(args.common.corpus, cfg.corpus, "corpus")?)?;
    let pred_path = pick(args.predictions, cfg.predictions, "predictions")?;
    let file = File::open(&pred_path).with_context(|| format!("cannot open predictions `{}`", pred_path.display()))?;
    let records = read_predictions(BufReader::new(file)).with_context(|| format!("cannot read predictions `{}`", pred_path.display()))?;

    let strategies = match args.strategy {
        Some(s) => Strategy::parse_list(&s)?,
        None => cfg.strategies.unwrap_or_else(|| Strategy::ALL.to_vec()),
    };
    let config = EvalConfig {
        strategies,
        exclude_triggers: args.exclude_triggers || cfg.exclude_triggers.unwrap_or(false),
    };
    let report = evaluate(&predictions_by_doc(&records), &relations_by_doc(&gold), &schema, &config);
    if !report.unmatched_doc_ids.is_empty() {
        let shown: Vec<_> = report.unmatched_doc_ids.iter().take(10).map(String::as_str).collect();
        eprintln!(
            "warning: {} document id(s) present on only one side (scored as empty): {}",
            report.unmatched_doc_ids.len(),
            shown.join(", ")
        );
    }
    print!("{}", report.table(&args.name));
    if let Some(out) = args.common.out.or(cfg.out) {
        let mut w = create(&out)?;
        writeln!(w, "{}", report.to_json())?;
        w.flush()?;
    }
    Ok(())
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct SplitStats {
    path: String,
    binary_subset_size: usize,
    #[serde(flatten)]
    stats: CorpusStats,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct StatsReport {
    splits: Vec<SplitStats>,
    total: SplitStats,
}

fn cmd_stats(args: StatsArgs) -> Result<()> {
    let cfg = RunConfig::load(args.config.as_deref())?;
    let schema = load_schema(&pick(args.schema, cfg.schema, "schema")?)?;
    let paths = if args.corpus.is_empty() {
        vec![cfg.corpus.context("no corpus given (use --corpus)")?]
    } else {
        args.corpus
    };
    let mut splits = Vec::new();
    let mut total = CorpusStats::empty(&schema);
    let mut total_binary = 0;
    for path in &paths {
        let corpus = load_corpus(path)?;
        let stats = corpus_stats(&corpus, &schema);
        let binary = binary_subset(&corpus, &schema).len();
        total = total.merge(&stats);
        total_binary += binary;
        eprintln!(
            "{}: {} documents, {} relations, {} entities, {} words, binary subset {binary}",
            path.display(),
            stats.document_count,
            stats.relation_count,
            stats.entity_count,
            stats.word_count
        );
        splits.push(SplitStats {
            path: path.display().to_string(),
            binary_subset_size: binary,
            stats,
        });
    }
    let report = StatsReport {
        splits,
        total: SplitStats {
            path: "total".into(),
            binary_subset_size: total_binary,
            stats: total,
        },
    };
    let text = serde_json::to_string_pretty(&report)?;
    match args.out.or(cfg.out) {
        Some(out) => {
            let mut w = create(&out)?;
            writeln!(w, "{text}")?;
            w.flush()?;
        }
        None => println!("{text}"),
    }
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> Result<()> {
    let mut cfg: SynthConfig = match &args.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("cannot read `{}`", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("invalid synth config `{}`", p.display()))?
        }
        None => SynthConfig::default(),
    };
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(n) = args.count {
        cfg.document_count = n;
    }
    if let Some(w) = args.max_relation_width {
        cfg.relation_width = w;
    }
    let docs = generate(&cfg)?;
    write_corpus_file(&args.out, &docs).with_context(|| format!("cannot write `{}`", args.out.display()))?;
    if let Some(path) = &args.schema {
        let mut w = create(path)?;
        writeln!(w, "{}", cfg.schema()?.to_json())?;
        w.flush()?;
    }
    eprintln!("{} documents written to {}", docs.len(), args.out.display());
    Ok(())
}

fn cmd_convert(args: ConvertArgs) -> Result<()> {
    let file = File::open(&args.input).with_context(|| format!("cannot open `{}`", args.input.display()))?;
    let docs = convert_smartdata(BufReader::new(file)).with_context(|| format!("cannot convert `{}`", args.input.display()))?;
    write_corpus_file(&args.out, &docs).with_context(|| format!("cannot write `{}`", args.out.display()))?;
    eprintln!("{} documents written to {}", docs.len(), args.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(a) => cmd_train(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Stats(a) => cmd_stats(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Convert(a) => cmd_convert(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
