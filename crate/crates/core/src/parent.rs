//! The PARENT metric: entailed n-gram precision/recall against both the
//! reference and the table, combined into a per-instance F-score.
//!
//! Per reference, four quantities are computed and combined:
//!
//! * entailed precision `E_p`: clipped n-gram precision where an n-gram
//!   absent from the reference still earns credit proportional to its
//!   entailment probability `w(g)`;
//! * entailed recall against the reference `E_r(R)`: clipped n-gram
//!   recall in which each reference n-gram is weighted by `w(g)`, so
//!   unsupported reference content neither helps nor hurts;
//! * recall against the table `E_r(T)`: per-record LCS coverage of the
//!   record values by the generation;
//! * the blend `E_r = E_r(R)^(1-lambda) * E_r(T)^lambda`, with `lambda`
//!   either fixed or derived per reference from how much of the table
//!   the reference itself covers.
//!
//! `F = harmonic mean of (E_p, E_r)`; with several references the best
//! F-score wins (lowest index on ties). Per-order components are
//! combined by geometric mean over orders 1..=max_order; an order with
//! an empty n-gram set or an all-zero weighted denominator is excluded
//! from the mean rather than dragging it to zero, and any included
//! component that is exactly 0 is replaced by `epsilon`.

use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::{EvalInstance, Table, TokenSequence};
use crate::entailment::EntailmentModel;
use crate::error::{Error, Result};
use crate::ngrams::{lcs_len, ngram_counts, NGramCounts, MAX_ORDER};
use crate::DEFAULT_EPSILON;

/// How the recall blend weight is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaMode {
    /// Per reference: `lambda = 1 - table_recall(reference, table)`, so
    /// divergent references shift recall weight onto the table.
    Auto,
    /// A fixed weight in `[0, 1]`; 0 ignores the table side, 1 ignores
    /// the reference side.
    Fixed(f64),
}

/// Scoring options plus the entailment model to use.
#[derive(Clone, Copy)]
pub struct ParentConfig<'m> {
    pub entailment: &'m dyn EntailmentModel,
    /// Smoothing constant substituted for zero-valued components.
    pub epsilon: f64,
    pub lambda_mode: LambdaMode,
    /// Highest n-gram order entering the geometric means (1..=4).
    pub max_order: usize,
    /// Scores with `w(g)` forced to 0 in precision and 1 in recall,
    /// reducing PARENT to plain clipped n-gram precision/recall.
    pub ablate_entailment: bool,
}

impl<'m> ParentConfig<'m> {
    pub fn new(entailment: &'m dyn EntailmentModel) -> Self {
        ParentConfig {
            entailment,
            epsilon: DEFAULT_EPSILON,
            lambda_mode: LambdaMode::Auto,
            max_order: MAX_ORDER,
            ablate_entailment: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "epsilon must be a positive finite number, got {}",
                self.epsilon
            )));
        }
        if let LambdaMode::Fixed(l) = self.lambda_mode {
            if !(0.0..=1.0).contains(&l) {
                return Err(Error::InvalidInput(format!(
                    "lambda must lie in [0, 1], got {l}"
                )));
            }
        }
        if self.max_order < 1 || self.max_order > MAX_ORDER {
            return Err(Error::InvalidInput(format!(
                "max_order must be in 1..={MAX_ORDER}, got {}",
                self.max_order
            )));
        }
        Ok(())
    }
}

/// Full per-instance breakdown for the best reference.
///
/// Per-order entries are `None` for orders excluded from the geometric
/// mean (empty n-gram set or all-zero weighted denominator); present
/// entries are the raw ratios before smoothing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParentScore {
    pub precision_by_order: Vec<Option<f64>>,
    pub e_p: f64,
    pub recall_ref_by_order: Vec<Option<f64>>,
    pub e_r_ref: f64,
    pub e_r_table: f64,
    pub lambda_used: f64,
    pub e_r: f64,
    pub f_score: f64,
    pub chosen_reference_index: usize,
}

/// Corpus-level aggregate: macro-average over instances.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusScore {
    pub mean_parent: f64,
    pub mean_lambda: f64,
    pub n_instances: usize,
    pub per_instance: Vec<ParentScore>,
}

/// Entailed n-gram precision of `generation` against `reference`.
///
/// Returns per-order components (`None` = excluded) and their smoothed
/// geometric mean.
pub fn entailed_precision(
    generation: &TokenSequence,
    reference: &TokenSequence,
    w: &dyn Fn(&[String]) -> f64,
    epsilon: f64,
    max_order: usize,
) -> Result<(Vec<Option<f64>>, f64)> {
    let gen_counts = counts_up_to(generation, max_order)?;
    let ref_counts = counts_up_to(reference, max_order)?;
    Ok(precision_from_counts(&gen_counts, &ref_counts, w, epsilon))
}

/// Entailed n-gram recall of `reference` by `generation`, weighting each
/// reference n-gram by its entailment probability.
pub fn entailed_recall_reference(
    generation: &TokenSequence,
    reference: &TokenSequence,
    w: &dyn Fn(&[String]) -> f64,
    epsilon: f64,
    max_order: usize,
) -> Result<(Vec<Option<f64>>, f64)> {
    let gen_counts = counts_up_to(generation, max_order)?;
    let ref_counts = counts_up_to(reference, max_order)?;
    Ok(recall_from_counts(&gen_counts, &ref_counts, w, epsilon))
}

/// Recall of the table by `text`: mean over records of
/// `LCS(value, text) / |value|`.
pub fn table_recall(text: &TokenSequence, table: &Table) -> f64 {
    let sum: f64 = table
        .records()
        .iter()
        .map(|r| lcs_len(r.value(), text) as f64 / r.value().len() as f64)
        .sum();
    sum / table.records().len() as f64
}

/// The heuristic blend weight: `1 - table_recall(reference, table)`.
///
/// A reference that covers the whole table yields 0 (trust the
/// reference); one that covers none of it yields 1 (trust the table).
pub fn auto_lambda(reference: &TokenSequence, table: &Table) -> f64 {
    (1.0 - table_recall(reference, table)).clamp(0.0, 1.0)
}

/// Blends the two recalls: `E_r(R)^(1-lambda) * E_r(T)^lambda`, with
/// exactly-zero components replaced by `epsilon` first. `lambda` of 0
/// or 1 returns the corresponding side unchanged (after smoothing).
pub fn combined_recall(e_r_ref: f64, e_r_table: f64, lambda: f64, epsilon: f64) -> f64 {
    let r = if e_r_ref == 0.0 { epsilon } else { e_r_ref };
    let t = if e_r_table == 0.0 { epsilon } else { e_r_table };
    if lambda == 0.0 {
        r
    } else if lambda == 1.0 {
        t
    } else {
        r.powf(1.0 - lambda) * t.powf(lambda)
    }
}

type WeightFn<'a> = &'a dyn Fn(&[String]) -> f64;

/// Scores one instance, returning the breakdown of the best-F reference
/// (ties broken toward the lowest index).
pub fn parent_instance(instance: &EvalInstance, config: &ParentConfig) -> ParentScore {
    debug_assert!(config.validate().is_ok());
    let items = instance.table().lexical_items();
    let model = config.entailment;
    let w_model = |g: &[String]| model.ngram_prob(g, &items);
    let w_zero = |_: &[String]| 0.0;
    let w_one = |_: &[String]| 1.0;
    let (w_prec, w_rec): (WeightFn<'_>, WeightFn<'_>) = if config.ablate_entailment {
        (&w_zero, &w_one)
    } else {
        (&w_model, &w_model)
    };

    let gen_counts =
        counts_up_to(instance.generation(), config.max_order).expect("validated max_order");
    let e_r_table = table_recall(instance.generation(), instance.table());

    let mut best: Option<ParentScore> = None;
    for (idx, reference) in instance.references().iter().enumerate() {
        let ref_counts = counts_up_to(reference, config.max_order).expect("validated max_order");
        let (precision_by_order, e_p) =
            precision_from_counts(&gen_counts, &ref_counts, w_prec, config.epsilon);
        let (recall_ref_by_order, e_r_ref) =
            recall_from_counts(&gen_counts, &ref_counts, w_rec, config.epsilon);
        let lambda_used = match config.lambda_mode {
            LambdaMode::Auto => auto_lambda(reference, instance.table()),
            LambdaMode::Fixed(l) => l,
        };
        let e_r = combined_recall(e_r_ref, e_r_table, lambda_used, config.epsilon);
        let f_score = if e_p + e_r > 0.0 {
            2.0 * e_p * e_r / (e_p + e_r)
        } else {
            0.0
        };
        let score = ParentScore {
            precision_by_order,
            e_p,
            recall_ref_by_order,
            e_r_ref,
            e_r_table,
            lambda_used,
            e_r,
            f_score,
            chosen_reference_index: idx,
        };
        if best.as_ref().is_none_or(|b| score.f_score > b.f_score) {
            best = Some(score);
        }
    }
    best.expect("instances have at least one reference")
}

/// Scores a corpus; the corpus score is the arithmetic mean of the
/// per-instance F-scores. Instances are scored in parallel on the
/// ambient rayon pool; results do not depend on the worker count.
pub fn parent_corpus(instances: &[EvalInstance], config: &ParentConfig) -> Result<CorpusScore> {
    config.validate()?;
    if instances.is_empty() {
        return Err(Error::InvalidInput("no instances to score".to_string()));
    }
    let per_instance: Vec<ParentScore> = instances
        .par_iter()
        .map(|i| parent_instance(i, config))
        .collect();
    let n = per_instance.len() as f64;
    let mean_parent = per_instance.iter().map(|s| s.f_score).sum::<f64>() / n;
    let mean_lambda = per_instance.iter().map(|s| s.lambda_used).sum::<f64>() / n;
    Ok(CorpusScore {
        mean_parent,
        mean_lambda,
        n_instances: per_instance.len(),
        per_instance,
    })
}

fn counts_up_to(seq: &TokenSequence, max_order: usize) -> Result<Vec<NGramCounts>> {
    (1..=max_order).map(|n| ngram_counts(seq, n)).collect()
}

fn precision_from_counts(
    gen_counts: &[NGramCounts],
    ref_counts: &[NGramCounts],
    w: &dyn Fn(&[String]) -> f64,
    epsilon: f64,
) -> (Vec<Option<f64>>, f64) {
    let by_order: Vec<Option<f64>> = gen_counts
        .iter()
        .zip(ref_counts)
        .map(|(gen, reference)| {
            if gen.total() == 0 {
                return None;
            }
            let mut num = 0.0;
            for (gram, count) in gen.iter() {
                let prob = w(gram);
                let clip = count.min(reference.count(gram));
                num += count as f64 * prob + clip as f64 * (1.0 - prob);
            }
            Some(num / gen.total() as f64)
        })
        .collect();
    let combined = geometric_combine(&by_order, epsilon);
    (by_order, combined)
}

fn recall_from_counts(
    gen_counts: &[NGramCounts],
    ref_counts: &[NGramCounts],
    w: &dyn Fn(&[String]) -> f64,
    epsilon: f64,
) -> (Vec<Option<f64>>, f64) {
    let by_order: Vec<Option<f64>> = gen_counts
        .iter()
        .zip(ref_counts)
        .map(|(gen, reference)| {
            if reference.total() == 0 {
                return None;
            }
            let mut num = 0.0;
            let mut den = 0.0;
            for (gram, count) in reference.iter() {
                let prob = w(gram);
                let clip = count.min(gen.count(gram));
                num += clip as f64 * prob;
                den += count as f64 * prob;
            }
            if den == 0.0 {
                // Nothing in the reference is entailed at this order.
                return None;
            }
            Some(num / den)
        })
        .collect();
    let combined = geometric_combine(&by_order, epsilon);
    (by_order, combined)
}

/// Geometric mean of the included components, substituting `epsilon`
/// for exact zeros; `epsilon` itself if every order is excluded.
fn geometric_combine(components: &[Option<f64>], epsilon: f64) -> f64 {
    let mut log_sum = 0.0;
    let mut included = 0usize;
    for value in components.iter().flatten() {
        let v = if *value == 0.0 { epsilon } else { *value };
        log_sum += v.ln();
        included += 1;
    }
    if included == 0 {
        epsilon
    } else {
        (log_sum / included as f64).exp()
    }
}
