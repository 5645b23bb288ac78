//! parent-eval: score table-to-text generations and meta-evaluate the
//! metrics themselves against human judgments.
//!
//! Results go to stdout as JSON lines; human-readable summaries and,
//! for stdout runs, the reproducibility manifest go to stderr. Exit
//! code 2 flags usage or data errors, 1 internal ones.

mod manifest;
mod meta;

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use parent_core::baselines::{bleu_corpus, bleu_t, extractive_metrics, load_extractions};
use parent_core::corpus::{load_instances, load_pairs, TokenSequence};
use parent_core::entailment::{
    train_cooccurrence, CooccurrenceModel, EntailmentModel, WordOverlapModel,
};
use parent_core::parent::{parent_corpus, LambdaMode, ParentConfig};
use parent_core::{Error, Result};
use serde::Serialize;

use crate::manifest::RunManifest;

#[derive(Parser)]
#[command(
    name = "parent-eval",
    version,
    about = "Table-to-text evaluation toolkit",
    propagate_version = true
)]
struct Cli {
    /// Worker threads for scoring and resampling (0 = one per core).
    #[arg(long, global = true, default_value_t = 0, env = "PARENT_EVAL_JOBS")]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score generations with PARENT.
    Score(ScoreArgs),
    /// Train a co-occurrence entailment model from (table, reference)
    /// pairs.
    TrainCooc(TrainCoocArgs),
    /// Corpus BLEU of generations against references.
    Bleu(BleuArgs),
    /// Corpus BLEU with each table value as an extra pseudo-reference.
    BleuT(BleuArgs),
    /// Content-selection and relation-generation scores from
    /// information extraction output.
    Extractive(ExtractiveArgs),
    /// Correlate metric scores with human pairwise judgments.
    MetaEval(meta::MetaEvalArgs),
}

#[derive(Args)]
struct ScoreArgs {
    /// Evaluation instances (JSONL: {"table", "references",
    /// "generation"}).
    #[arg(long)]
    instances: PathBuf,
    /// Entailment model: "word-overlap" or "cooccurrence:<model path>".
    #[arg(long, default_value = "word-overlap")]
    entailment: String,
    /// Recall blend weight: "auto" or a fixed value in [0, 1].
    #[arg(long, default_value = "auto")]
    lambda: String,
    /// Smoothing constant substituted for zero components.
    #[arg(long, default_value_t = parent_core::DEFAULT_EPSILON)]
    epsilon: f64,
    /// Highest n-gram order (1..=4).
    #[arg(long, default_value_t = 4)]
    max_order: usize,
    /// Drop the entailment weighting, reducing PARENT to plain clipped
    /// n-gram precision/recall.
    #[arg(long)]
    ablate_entailment: bool,
    /// Write per-instance JSONL here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TrainCoocArgs {
    /// Training pairs (JSONL: {"table", "reference"}).
    #[arg(long)]
    pairs: PathBuf,
    /// Minimum co-occurrence count for a (token, item) entry to be
    /// kept.
    #[arg(long, default_value_t = 1)]
    min_count: u64,
    /// Where to write the model (TSV).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BleuArgs {
    /// Evaluation instances (JSONL: {"table", "references",
    /// "generation"}).
    #[arg(long)]
    instances: PathBuf,
    /// Write the corpus score here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExtractiveArgs {
    /// Evaluation instances (JSONL: {"table", "references",
    /// "generation"}).
    #[arg(long)]
    instances: PathBuf,
    /// Extractions from the generations (JSONL: {"index", "pairs"}).
    #[arg(long)]
    generated: PathBuf,
    /// Extractions from the references (JSONL: {"index", "pairs"}).
    #[arg(long)]
    references: PathBuf,
    /// Write per-instance JSONL here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Undefined(_) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    if cli.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build_global()
            .map_err(|e| {
                Error::InvalidInput(format!("cannot configure {} worker threads: {e}", cli.jobs))
            })?;
    }
    match &cli.command {
        Command::Score(args) => score(args, cli.jobs),
        Command::TrainCooc(args) => train_cooc(args, cli.jobs),
        Command::Bleu(args) => bleu(args, cli.jobs, false),
        Command::BleuT(args) => bleu(args, cli.jobs, true),
        Command::Extractive(args) => extractive(args, cli.jobs),
        Command::MetaEval(args) => meta::run(args, cli.jobs),
    }
}

#[derive(Serialize)]
struct ScoreLine {
    index: usize,
    parent: f64,
    e_p: f64,
    e_r: f64,
    e_r_ref: f64,
    e_r_table: f64,
    lambda: f64,
    ref_index: usize,
}

#[derive(Serialize)]
struct ScoreSummary {
    mean_parent: f64,
    mean_lambda: f64,
    n_instances: usize,
}

fn score(args: &ScoreArgs, jobs: usize) -> Result<()> {
    let instances = load_instances(&args.instances)?;
    let (model, model_path) = build_entailment(&args.entailment)?;
    let mut config = ParentConfig::new(model.as_ref());
    config.lambda_mode = parse_lambda(&args.lambda)?;
    config.epsilon = args.epsilon;
    config.max_order = args.max_order;
    config.ablate_entailment = args.ablate_entailment;
    let corpus = parent_corpus(&instances, &config)?;

    let mut out = open_output(args.out.as_deref())?;
    for (index, s) in corpus.per_instance.iter().enumerate() {
        let line = ScoreLine {
            index,
            parent: s.f_score,
            e_p: s.e_p,
            e_r: s.e_r,
            e_r_ref: s.e_r_ref,
            e_r_table: s.e_r_table,
            lambda: s.lambda_used,
            ref_index: s.chosen_reference_index,
        };
        writeln!(
            out,
            "{}",
            serde_json::to_string(&line).expect("serializable")
        )?;
    }
    let summary = ScoreSummary {
        mean_parent: corpus.mean_parent,
        mean_lambda: corpus.mean_lambda,
        n_instances: corpus.n_instances,
    };
    writeln!(
        out,
        "{}",
        serde_json::to_string(&summary).expect("serializable")
    )?;
    out.flush()?;

    eprintln!("instances    {}", corpus.n_instances);
    eprintln!("mean parent  {:.4}", corpus.mean_parent);
    eprintln!("mean lambda  {:.4}", corpus.mean_lambda);

    let mut manifest = RunManifest::new("score", jobs);
    manifest.flag("entailment", &args.entailment);
    manifest.flag("lambda", &args.lambda);
    manifest.flag("epsilon", args.epsilon);
    manifest.flag("max-order", args.max_order);
    manifest.flag("ablate-entailment", args.ablate_entailment);
    manifest.input(&args.instances)?;
    if let Some(path) = &model_path {
        manifest.input(path)?;
    }
    manifest.emit(args.out.as_deref())
}

fn train_cooc(args: &TrainCoocArgs, jobs: usize) -> Result<()> {
    let pairs = load_pairs(&args.pairs)?;
    let model = train_cooccurrence(&pairs, args.min_count)?;
    model.save(&args.out)?;
    eprintln!(
        "trained on {} pairs: {} (token, item) entries -> {}",
        model.pairs_seen(),
        model.entry_count(),
        args.out.display()
    );
    let mut manifest = RunManifest::new("train-cooc", jobs);
    manifest.flag("min-count", args.min_count);
    manifest.input(&args.pairs)?;
    manifest.emit(Some(&args.out))
}

#[derive(Serialize)]
struct BleuLine {
    bleu: f64,
    precisions: Vec<f64>,
    brevity_penalty: f64,
    hypothesis_length: u64,
    reference_length: u64,
}

fn bleu(args: &BleuArgs, jobs: usize, with_tables: bool) -> Result<()> {
    let instances = load_instances(&args.instances)?;
    let score = if with_tables {
        bleu_t(&instances)?
    } else {
        let hypotheses: Vec<TokenSequence> =
            instances.iter().map(|i| i.generation().clone()).collect();
        let references: Vec<Vec<TokenSequence>> =
            instances.iter().map(|i| i.references().to_vec()).collect();
        bleu_corpus(&hypotheses, &references)?
    };
    let name = if with_tables { "bleu-t" } else { "bleu" };
    let line = BleuLine {
        bleu: score.score,
        precisions: score.precisions.clone(),
        brevity_penalty: score.brevity_penalty,
        hypothesis_length: score.hypothesis_length,
        reference_length: score.reference_length,
    };
    let mut out = open_output(args.out.as_deref())?;
    writeln!(
        out,
        "{}",
        serde_json::to_string(&line).expect("serializable")
    )?;
    out.flush()?;
    eprintln!(
        "{name}  {:.4} (brevity penalty {:.4})",
        score.score, score.brevity_penalty
    );
    let mut manifest = RunManifest::new(name, jobs);
    manifest.input(&args.instances)?;
    manifest.emit(args.out.as_deref())
}

#[derive(Serialize)]
struct ExtractiveLine {
    index: usize,
    cs: f64,
    rg: f64,
    rg_f: f64,
}

#[derive(Serialize)]
struct ExtractiveSummary {
    mean_cs: f64,
    mean_rg: f64,
    mean_rg_f: f64,
    n_instances: usize,
}

fn extractive(args: &ExtractiveArgs, jobs: usize) -> Result<()> {
    let instances = load_instances(&args.instances)?;
    if instances.is_empty() {
        return Err(Error::InvalidInput(format!(
            "no instances in {}",
            args.instances.display()
        )));
    }
    let generated = load_extractions(&args.generated)?;
    let references = load_extractions(&args.references)?;
    let missing = |path: &Path, index: usize| {
        Error::InvalidInput(format!(
            "{} has no extraction record for instance {index}",
            path.display()
        ))
    };

    let mut out = open_output(args.out.as_deref())?;
    let (mut sum_cs, mut sum_rg, mut sum_rg_f) = (0.0, 0.0, 0.0);
    for (index, instance) in instances.iter().enumerate() {
        let gen_set = generated
            .get(&index)
            .ok_or_else(|| missing(&args.generated, index))?;
        let ref_set = references
            .get(&index)
            .ok_or_else(|| missing(&args.references, index))?;
        let scores = extractive_metrics(gen_set, ref_set, instance.table());
        sum_cs += scores.cs;
        sum_rg += scores.rg;
        sum_rg_f += scores.rg_f;
        let line = ExtractiveLine {
            index,
            cs: scores.cs,
            rg: scores.rg,
            rg_f: scores.rg_f,
        };
        writeln!(
            out,
            "{}",
            serde_json::to_string(&line).expect("serializable")
        )?;
    }
    let n = instances.len() as f64;
    let summary = ExtractiveSummary {
        mean_cs: sum_cs / n,
        mean_rg: sum_rg / n,
        mean_rg_f: sum_rg_f / n,
        n_instances: instances.len(),
    };
    writeln!(
        out,
        "{}",
        serde_json::to_string(&summary).expect("serializable")
    )?;
    out.flush()?;

    eprintln!("instances  {}", summary.n_instances);
    eprintln!("mean cs    {:.4}", summary.mean_cs);
    eprintln!("mean rg    {:.4}", summary.mean_rg);
    eprintln!("mean rg-f  {:.4}", summary.mean_rg_f);

    let mut manifest = RunManifest::new("extractive", jobs);
    manifest.input(&args.instances)?;
    manifest.input(&args.generated)?;
    manifest.input(&args.references)?;
    manifest.emit(args.out.as_deref())
}

fn build_entailment(spec: &str) -> Result<(Box<dyn EntailmentModel>, Option<PathBuf>)> {
    if spec == "word-overlap" {
        return Ok((Box::new(WordOverlapModel), None));
    }
    if let Some(path) = spec.strip_prefix("cooccurrence:") {
        let path = PathBuf::from(path);
        let model = CooccurrenceModel::load(&path)?;
        return Ok((Box::new(model), Some(path)));
    }
    Err(Error::InvalidInput(format!(
        "--entailment must be \"word-overlap\" or \"cooccurrence:<model path>\", got {spec:?}"
    )))
}

fn parse_lambda(raw: &str) -> Result<LambdaMode> {
    if raw == "auto" {
        return Ok(LambdaMode::Auto);
    }
    match raw.parse::<f64>() {
        Ok(v) if (0.0..=1.0).contains(&v) => Ok(LambdaMode::Fixed(v)),
        _ => Err(Error::InvalidInput(format!(
            "--lambda must be \"auto\" or a number in [0, 1], got {raw:?}"
        ))),
    }
}

fn open_output(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => {
            let file = File::create(path).map_err(|e| {
                Error::InvalidInput(format!("cannot create {}: {e}", path.display()))
            })?;
            Box::new(std::io::BufWriter::new(file))
        }
        None => Box::new(std::io::BufWriter::new(std::io::stdout().lock())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_parsing_names_the_flag() {
        assert_eq!(parse_lambda("auto").unwrap(), LambdaMode::Auto);
        assert_eq!(parse_lambda("0.5").unwrap(), LambdaMode::Fixed(0.5));
        for bad in ["1.5", "-0.1", "NaN", "half"] {
            let err = parse_lambda(bad).unwrap_err();
            assert!(err.to_string().contains("--lambda"), "{err}");
        }
    }

    #[test]
    fn entailment_spec_rejects_unknown_models() {
        let Err(err) = build_entailment("neural") else {
            panic!("expected an error for an unknown model spec");
        };
        assert!(err.to_string().contains("--entailment"));
        assert!(build_entailment("word-overlap").is_ok());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
