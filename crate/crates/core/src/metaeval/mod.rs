//! Meta-evaluation: how well do automatic metrics track human pairwise
//! judgments?
//!
//! Human judgments are scaled to per-system scores with Thurstone's
//! paired-comparison model; metrics are correlated against those scores
//! under bootstrap resampling of instances, with percentile confidence
//! intervals and a paired difference test for significance. Instance-
//! level agreement is measured by pairwise accuracy and compared across
//! metrics with McNemar's test. Entailment-labeled corpora can be
//! subsampled to fixed entailed proportions to study metric behavior
//! under reference divergence.

mod accuracy;
mod bootstrap;
mod correlation;
mod mcnemar;
mod slices;
mod thurstone;

pub use accuracy::{agreement_flags, pairwise_accuracy};
pub use bootstrap::{
    bootstrap_correlations, correlation_ci_difference, BootstrapOptions, BootstrapResult,
    CorrelationDifference,
};
pub use correlation::{pearson, spearman};
pub use mcnemar::mcnemar_test;
pub use slices::{entailed_proportion_slices, load_entailed_labels, ProportionSlice};
pub use thurstone::thurstone_scores;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::Deserialize;
use serde::Serialize;

use crate::error::{Error, Result};

/// System identifiers with an aligned vector of scores.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemScores {
    pub systems: Vec<String>,
    pub scores: Vec<f64>,
}

impl SystemScores {
    pub fn get(&self, system: &str) -> Option<f64> {
        self.systems
            .iter()
            .position(|s| s == system)
            .map(|i| self.scores[i])
    }
}

/// Per-instance scores one metric assigns to each system's outputs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricScores {
    // system -> instance id -> score
    scores: BTreeMap<String, BTreeMap<String, f64>>,
}

impl MetricScores {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records one score. Errors on non-finite values or duplicate
    /// (system, instance) keys.
    pub fn insert(&mut self, system: &str, instance_id: &str, score: f64) -> Result<()> {
        if !score.is_finite() {
            return Err(Error::InvalidInput(format!(
                "non-finite score for system {system:?}, instance {instance_id:?}"
            )));
        }
        if self
            .scores
            .entry(system.to_string())
            .or_default()
            .insert(instance_id.to_string(), score)
            .is_some()
        {
            return Err(Error::InvalidInput(format!(
                "duplicate score for system {system:?}, instance {instance_id:?}"
            )));
        }
        Ok(())
    }

    pub fn get(&self, system: &str, instance_id: &str) -> Option<f64> {
        self.scores.get(system)?.get(instance_id).copied()
    }

    pub fn systems(&self) -> impl Iterator<Item = &str> {
        self.scores.keys().map(|s| s.as_str())
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

#[derive(Deserialize)]
struct RawMetricScore {
    instance_id: String,
    system: String,
    score: f64,
}

/// Loads per-system per-instance metric scores from a JSONL file of
/// `{"instance_id", "system", "score"}` lines.
pub fn load_metric_scores(path: impl AsRef<Path>) -> Result<MetricScores> {
    let display = path.as_ref().display().to_string();
    let file = File::open(path.as_ref())
        .map_err(|e| Error::InvalidInput(format!("cannot open {display}: {e}")))?;
    let mut scores = MetricScores::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawMetricScore = serde_json::from_str(&line)
            .map_err(|e| Error::parse(&display, idx + 1, e.to_string()))?;
        scores
            .insert(&raw.system, &raw.instance_id, raw.score)
            .map_err(|e| Error::parse(&display, idx + 1, e.to_string()))?;
    }
    Ok(scores)
}
