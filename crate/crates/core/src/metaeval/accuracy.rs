//! Instance-level agreement between a metric and human judgments.

use crate::corpus::{JudgmentSet, Winner};
use crate::error::{Error, Result};
use crate::metaeval::MetricScores;

/// Fraction of judged comparisons where the metric's per-instance
/// scores prefer the same side as the annotator; exact score ties count
/// half.
///
/// Errors on an empty judgment set or a comparison whose texts the
/// metric did not score.
pub fn pairwise_accuracy(metric: &MetricScores, judgments: &JudgmentSet) -> Result<f64> {
    if judgments.comparisons().is_empty() {
        return Err(Error::InvalidInput(
            "no comparisons to evaluate".to_string(),
        ));
    }
    let mut credit = 0.0;
    for c in judgments.comparisons() {
        let (a, b) = comparison_scores(metric, c)?;
        if a == b {
            credit += 0.5;
        } else {
            let metric_prefers_a = a > b;
            let human_prefers_a = c.winner == Winner::A;
            if metric_prefers_a == human_prefers_a {
                credit += 1.0;
            }
        }
    }
    Ok(credit / judgments.comparisons().len() as f64)
}

/// Per-comparison correctness flags for McNemar's test: `true` where
/// the metric strictly prefers the side the annotator chose. Ties count
/// as incorrect.
pub fn agreement_flags(metric: &MetricScores, judgments: &JudgmentSet) -> Result<Vec<bool>> {
    judgments
        .comparisons()
        .iter()
        .map(|c| {
            let (a, b) = comparison_scores(metric, c)?;
            Ok(match c.winner {
                Winner::A => a > b,
                Winner::B => b > a,
            })
        })
        .collect()
}

fn comparison_scores(metric: &MetricScores, c: &crate::corpus::Judgment) -> Result<(f64, f64)> {
    let lookup = |system: &str| {
        metric.get(system, &c.instance_id).ok_or_else(|| {
            Error::InvalidInput(format!(
                "no metric score for system {system:?} on instance {:?}",
                c.instance_id
            ))
        })
    };
    Ok((lookup(&c.system_a)?, lookup(&c.system_b)?))
}
