//! The meta-eval subcommand: how well each metric tracks human
//! judgments, with bootstrap significance.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use parent_core::corpus::{load_judgments, Judgment, JudgmentSet};
use parent_core::metaeval::{
    agreement_flags, bootstrap_correlations, correlation_ci_difference, entailed_proportion_slices,
    load_entailed_labels, load_metric_scores, mcnemar_test, pairwise_accuracy, thurstone_scores,
    BootstrapOptions, BootstrapResult, MetricScores,
};
use parent_core::{Error, Result};
use serde::Serialize;

use crate::manifest::RunManifest;

#[derive(clap::Args)]
pub struct MetaEvalArgs {
    /// Metric score files (JSONL: {"instance_id", "system", "score"}),
    /// comma separated; each metric is named by its file stem.
    #[arg(long, value_delimiter = ',', required = true)]
    metrics: Vec<PathBuf>,
    /// Human pairwise judgments (JSONL: {"instance_id", "system_a",
    /// "system_b", "winner"}).
    #[arg(long)]
    judgments: PathBuf,
    /// Bootstrap iterations.
    #[arg(long, default_value_t = 500)]
    iterations: usize,
    /// Two-sided level for confidence intervals and significance.
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    /// Root RNG seed; resamples and slices derive from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Correlate every resample against the full-data human scores
    /// instead of rescaling judgments per resample.
    #[arg(long)]
    freeze_human_scores: bool,
    /// Entailment labels (JSONL: {"instance_id", "entailed"}) for
    /// proportion slicing.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Entailed proportions to slice at, comma separated.
    #[arg(long, value_delimiter = ',')]
    proportions: Vec<f64>,
    /// Instances per proportion slice.
    #[arg(long)]
    slice_size: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct Report {
    human_scores: BTreeMap<String, f64>,
    metrics: BTreeMap<String, MetricReport>,
    significance: Vec<SignificanceEntry>,
    mcnemar: Vec<McNemarEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    slices: Option<Vec<SliceReport>>,
}

#[derive(Serialize)]
struct MetricReport {
    mean_correlation: f64,
    ci_lower: f64,
    ci_upper: f64,
    pairwise_accuracy: f64,
}

/// Whether metric `a` correlates significantly better than metric `b`.
#[derive(Serialize)]
struct SignificanceEntry {
    a: String,
    b: String,
    lower: f64,
    upper: f64,
    significant: bool,
}

#[derive(Serialize)]
struct McNemarEntry {
    a: String,
    b: String,
    p_value: f64,
}

#[derive(Serialize)]
struct SliceReport {
    proportion: f64,
    n_instances: usize,
    metrics: BTreeMap<String, MetricReport>,
}

pub fn run(args: &MetaEvalArgs, jobs: usize) -> Result<()> {
    let judgments = load_judgments(&args.judgments)?;
    let mut metrics: Vec<(String, PathBuf, MetricScores)> = Vec::with_capacity(args.metrics.len());
    for path in &args.metrics {
        let name = path
            .file_stem()
            .and_then(|s| s.to_str())
            .map(str::to_string)
            .ok_or_else(|| {
                Error::InvalidInput(format!(
                    "cannot derive a metric name from {}",
                    path.display()
                ))
            })?;
        metrics.push((name, path.clone(), load_metric_scores(path)?));
    }
    metrics.sort_by(|a, b| a.0.cmp(&b.0));
    for pair in metrics.windows(2) {
        if pair[0].0 == pair[1].0 {
            return Err(Error::InvalidInput(format!(
                "two metric files share the stem {:?}; rename one",
                pair[0].0
            )));
        }
    }

    let options = BootstrapOptions {
        iterations: args.iterations,
        alpha: args.alpha,
        seed: args.seed,
        freeze_human_scores: args.freeze_human_scores,
    };

    let human = thurstone_scores(&judgments)?;
    let mut runs: BTreeMap<&str, BootstrapResult> = BTreeMap::new();
    let mut flags: BTreeMap<&str, Vec<bool>> = BTreeMap::new();
    let mut metric_reports = BTreeMap::new();
    for (name, _, scores) in &metrics {
        let boot = bootstrap_correlations(scores, &judgments, &options)?;
        metric_reports.insert(
            name.clone(),
            MetricReport {
                mean_correlation: boot.mean,
                ci_lower: boot.ci_lower,
                ci_upper: boot.ci_upper,
                pairwise_accuracy: pairwise_accuracy(scores, &judgments)?,
            },
        );
        flags.insert(name, agreement_flags(scores, &judgments)?);
        runs.insert(name, boot);
    }

    let mut significance = Vec::new();
    for (name_a, run_a) in &runs {
        for (name_b, run_b) in &runs {
            if name_a == name_b {
                continue;
            }
            let diff = correlation_ci_difference(run_a, run_b, args.alpha)?;
            significance.push(SignificanceEntry {
                a: name_a.to_string(),
                b: name_b.to_string(),
                lower: diff.lower,
                upper: diff.upper,
                significant: diff.significant,
            });
        }
    }

    let mut mcnemar = Vec::new();
    let names: Vec<&str> = flags.keys().copied().collect();
    for (i, a) in names.iter().enumerate() {
        for b in &names[i + 1..] {
            mcnemar.push(McNemarEntry {
                a: a.to_string(),
                b: b.to_string(),
                p_value: mcnemar_test(&flags[a], &flags[b])?,
            });
        }
    }

    let report = Report {
        human_scores: human
            .systems
            .iter()
            .cloned()
            .zip(human.scores.iter().copied())
            .collect(),
        metrics: metric_reports,
        significance,
        mcnemar,
        slices: slice_reports(args, &metrics, &judgments, &options)?,
    };

    for (name, m) in &report.metrics {
        eprintln!(
            "{name:<20} corr {:+.4} [{:+.4}, {:+.4}]  acc {:.4}",
            m.mean_correlation, m.ci_lower, m.ci_upper, m.pairwise_accuracy
        );
    }

    let rendered = serde_json::to_string_pretty(&report).expect("serializable");
    match &args.out {
        Some(path) => std::fs::write(path, rendered + "\n")?,
        None => println!("{rendered}"),
    }

    let mut manifest = RunManifest::new("meta-eval", jobs);
    manifest.seed = Some(args.seed);
    manifest.flag("iterations", args.iterations);
    manifest.flag("alpha", args.alpha);
    manifest.flag("freeze-human-scores", args.freeze_human_scores);
    if !args.proportions.is_empty() {
        let rendered: Vec<String> = args.proportions.iter().map(f64::to_string).collect();
        manifest.flag("proportions", rendered.join(","));
    }
    if let Some(size) = args.slice_size {
        manifest.flag("slice-size", size);
    }
    manifest.input(&args.judgments)?;
    for (_, path, _) in &metrics {
        manifest.input(path)?;
    }
    if let Some(labels) = &args.labels {
        manifest.input(labels)?;
    }
    manifest.emit(args.out.as_deref())
}

/// Re-runs the correlation analysis on judgment subsets drawn at fixed
/// entailed proportions.
fn slice_reports(
    args: &MetaEvalArgs,
    metrics: &[(String, PathBuf, MetricScores)],
    judgments: &JudgmentSet,
    options: &BootstrapOptions,
) -> Result<Option<Vec<SliceReport>>> {
    let Some(labels_path) = &args.labels else {
        if !args.proportions.is_empty() || args.slice_size.is_some() {
            return Err(Error::InvalidInput(
                "--proportions and --slice-size need --labels".to_string(),
            ));
        }
        return Ok(None);
    };
    let (Some(slice_size), false) = (args.slice_size, args.proportions.is_empty()) else {
        return Err(Error::InvalidInput(
            "--labels needs both --proportions and --slice-size".to_string(),
        ));
    };

    let labels = load_entailed_labels(labels_path)?;
    let slices = entailed_proportion_slices(&labels, &args.proportions, slice_size, args.seed)?;
    let mut reports = Vec::with_capacity(slices.len());
    for slice in &slices {
        let wanted: BTreeSet<&str> = slice.instance_ids.iter().map(String::as_str).collect();
        let comparisons: Vec<Judgment> = judgments
            .comparisons()
            .iter()
            .filter(|c| wanted.contains(c.instance_id.as_str()))
            .cloned()
            .collect();
        let sliced = JudgmentSet::new(judgments.systems().to_vec(), comparisons)?;
        let mut metric_reports = BTreeMap::new();
        for (name, _, scores) in metrics {
            let boot = bootstrap_correlations(scores, &sliced, options)?;
            metric_reports.insert(
                name.clone(),
                MetricReport {
                    mean_correlation: boot.mean,
                    ci_lower: boot.ci_lower,
                    ci_upper: boot.ci_upper,
                    pairwise_accuracy: pairwise_accuracy(scores, &sliced)?,
                },
            );
        }
        reports.push(SliceReport {
            proportion: slice.proportion,
            n_instances: slice.instance_ids.len(),
            metrics: metric_reports,
        });
    }
    Ok(Some(reports))
}
