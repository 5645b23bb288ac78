//! Bootstrap confidence intervals for metric-human correlations.
//!
//! Instances are resampled with replacement; each resample yields
//! system-level metric scores (per-system means over the drawn
//! instances) and rescaled human scores (Thurstone on the drawn
//! judgments), and the Pearson correlation between the two. Iteration
//! `i` always draws from RNG stream `i + 1` of the root seed, so runs
//! are reproducible and independent of worker count, and two metrics
//! bootstrapped with the same seed, iteration count, and judgment set
//! see identical resamples. That pairing is what makes the percentile
//! interval on per-iteration correlation differences a valid
//! significance test.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::corpus::{JudgmentSet, Winner};
use crate::error::{Error, Result};
use crate::metaeval::correlation::pearson;
use crate::metaeval::thurstone::solve_from_wins;
use crate::metaeval::MetricScores;

/// A resample can degenerate (a system drops out of the comparison
/// graph, or the rescaled human scores are all equal); such draws are
/// discarded and redrawn from the same stream. The decision never looks
/// at the metric, so redraws stay identical across metrics.
const MAX_REDRAWS: usize = 1000;

/// Controls for [`bootstrap_correlations`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapOptions {
    /// Number of bootstrap iterations.
    pub iterations: usize,
    /// Two-sided level for the percentile interval.
    pub alpha: f64,
    /// Root seed; iteration `i` uses stream `i + 1`.
    pub seed: u64,
    /// Correlate every resample against the full-data human scores
    /// instead of rescaling judgments per resample.
    pub freeze_human_scores: bool,
}

impl Default for BootstrapOptions {
    fn default() -> Self {
        BootstrapOptions {
            iterations: 500,
            alpha: 0.1,
            seed: 0,
            freeze_human_scores: false,
        }
    }
}

/// Bootstrap distribution of one metric's correlation with human
/// scores.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapResult {
    /// Per-iteration Pearson correlations, in iteration order.
    pub correlations: Vec<f64>,
    pub mean: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub alpha: f64,
    pub seed: u64,
}

/// Percentile interval on the paired per-iteration difference of two
/// bootstrap runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationDifference {
    pub lower: f64,
    pub upper: f64,
    /// True when the whole interval lies above zero, i.e. the first
    /// run correlates significantly better than the second.
    pub significant: bool,
}

/// Bootstraps the correlation between a metric and Thurstone-scaled
/// human judgments.
///
/// The metric must score every system of the judgment set on every
/// instance that carries a comparison. Errors on missing scores, on
/// degenerate judgment sets (the full data must scale cleanly before
/// any resampling starts), and on a metric that assigns all systems
/// the same aggregate score in some resample, which leaves the
/// correlation undefined.
pub fn bootstrap_correlations(
    metric: &MetricScores,
    judgments: &JudgmentSet,
    options: &BootstrapOptions,
) -> Result<BootstrapResult> {
    if options.iterations < 2 {
        return Err(Error::InvalidInput(
            "bootstrap needs at least two iterations".to_string(),
        ));
    }
    if !(options.alpha > 0.0 && options.alpha < 1.0) {
        return Err(Error::InvalidInput(format!(
            "alpha must lie in (0, 1), got {}",
            options.alpha
        )));
    }
    let systems = judgments.systems();
    if systems.len() < 2 {
        return Err(Error::InvalidInput(
            "bootstrap needs at least two systems".to_string(),
        ));
    }

    let mut universe: Vec<String> = judgments
        .comparisons()
        .iter()
        .map(|c| c.instance_id.clone())
        .collect();
    universe.sort();
    universe.dedup();
    if universe.is_empty() {
        return Err(Error::InvalidInput(
            "judgment set has no comparisons".to_string(),
        ));
    }

    let system_index: HashMap<&str, usize> = systems
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    let instance_index: HashMap<&str, usize> = universe
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();

    let mut pairs_by_instance: Vec<Vec<(usize, usize)>> = vec![Vec::new(); universe.len()];
    for c in judgments.comparisons() {
        let (winner, loser) = match c.winner {
            Winner::A => (&c.system_a, &c.system_b),
            Winner::B => (&c.system_b, &c.system_a),
        };
        pairs_by_instance[instance_index[c.instance_id.as_str()]]
            .push((system_index[winner.as_str()], system_index[loser.as_str()]));
    }

    let mut metric_rows: Vec<Vec<f64>> = Vec::with_capacity(universe.len());
    for id in &universe {
        let mut row = Vec::with_capacity(systems.len());
        for system in systems {
            row.push(metric.get(system, id).ok_or_else(|| {
                Error::InvalidInput(format!(
                    "metric has no score for system {system:?} on instance {id:?}"
                ))
            })?);
        }
        metric_rows.push(row);
    }

    // Scaling the full data up front surfaces disconnected or
    // under-covered judgment sets before any resampling starts.
    let mut full_wins = vec![vec![0u64; systems.len()]; systems.len()];
    for pairs in &pairs_by_instance {
        for &(w, l) in pairs {
            full_wins[w][l] += 1;
        }
    }
    let full_scores = solve_from_wins(&full_wins)?;
    let frozen = if options.freeze_human_scores {
        if is_constant(&full_scores) {
            return Err(Error::Undefined(
                "human scores have zero variance; correlation is undefined".to_string(),
            ));
        }
        Some(full_scores)
    } else {
        None
    };

    let n = universe.len();
    let correlations: Vec<f64> = (0..options.iterations)
        .into_par_iter()
        .map(|iteration| {
            let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
            rng.set_stream(iteration as u64 + 1);
            for _ in 0..MAX_REDRAWS {
                let sample: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();

                let resampled;
                let human: &[f64] = match &frozen {
                    Some(scores) => scores,
                    None => {
                        let mut wins = vec![vec![0u64; systems.len()]; systems.len()];
                        for &idx in &sample {
                            for &(w, l) in &pairs_by_instance[idx] {
                                wins[w][l] += 1;
                            }
                        }
                        match solve_from_wins(&wins) {
                            Ok(scores) if !is_constant(&scores) => {
                                resampled = scores;
                                &resampled
                            }
                            _ => continue,
                        }
                    }
                };

                let mut aggregate = vec![0.0f64; systems.len()];
                for &idx in &sample {
                    for (total, score) in aggregate.iter_mut().zip(&metric_rows[idx]) {
                        *total += score;
                    }
                }
                for total in &mut aggregate {
                    *total /= n as f64;
                }
                if is_constant(&aggregate) {
                    return Err(Error::Undefined(format!(
                        "metric aggregates to a single value across systems \
                         in iteration {iteration}; correlation is undefined"
                    )));
                }
                return pearson(&aggregate, human);
            }
            Err(Error::Undefined(format!(
                "no informative resample in {MAX_REDRAWS} draws at iteration {iteration}"
            )))
        })
        .collect::<Result<_>>()?;

    let mean = correlations.iter().sum::<f64>() / correlations.len() as f64;
    let mut sorted = correlations.clone();
    sorted.sort_by(f64::total_cmp);
    Ok(BootstrapResult {
        mean,
        ci_lower: quantile(&sorted, options.alpha / 2.0),
        ci_upper: quantile(&sorted, 1.0 - options.alpha / 2.0),
        alpha: options.alpha,
        seed: options.seed,
        correlations,
    })
}

/// Percentile interval on the per-iteration differences `a - b` of two
/// paired bootstrap runs. The runs must come from the same seed and
/// iteration count (and, for the pairing to mean anything, the same
/// judgment set); `significant` is true when the whole interval lies
/// above zero.
pub fn correlation_ci_difference(
    a: &BootstrapResult,
    b: &BootstrapResult,
    alpha: f64,
) -> Result<CorrelationDifference> {
    if a.correlations.len() != b.correlations.len() {
        return Err(Error::InvalidInput(format!(
            "runs are not paired: {} vs {} iterations",
            a.correlations.len(),
            b.correlations.len()
        )));
    }
    if a.seed != b.seed {
        return Err(Error::InvalidInput(format!(
            "runs are not paired: seed {} vs {}",
            a.seed, b.seed
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidInput(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    let mut diffs: Vec<f64> = a
        .correlations
        .iter()
        .zip(&b.correlations)
        .map(|(x, y)| x - y)
        .collect();
    diffs.sort_by(f64::total_cmp);
    let lower = quantile(&diffs, alpha / 2.0);
    let upper = quantile(&diffs, 1.0 - alpha / 2.0);
    Ok(CorrelationDifference {
        lower,
        upper,
        significant: lower > 0.0,
    })
}

fn is_constant(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[0] == w[1])
}

/// Linear-interpolation sample quantile on a sorted slice.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (h - lo as f64)
}
