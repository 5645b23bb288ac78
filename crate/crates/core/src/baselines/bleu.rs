//! Corpus-level BLEU-4 and its table-aware variant BLEU-T.

use std::collections::HashMap;

use serde::Serialize;

use crate::corpus::{EvalInstance, TokenSequence};
use crate::error::{Error, Result};
use crate::ngrams::MAX_ORDER;
use crate::DEFAULT_EPSILON;

/// Corpus BLEU with its components.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BleuScore {
    pub score: f64,
    /// Clipped precision per order 1..=4, before smoothing.
    pub precisions: Vec<f64>,
    pub brevity_penalty: f64,
    pub hypothesis_length: u64,
    pub reference_length: u64,
}

/// Corpus BLEU-4: corpus-level clipped n-gram precisions (counts clipped
/// at the per-instance maximum over references), combined by geometric
/// mean with uniform weights, times a brevity penalty. The effective
/// reference length is the per-instance reference length closest to the
/// hypothesis length, ties broken toward the shorter. Zero precisions
/// are floored at 1e-5 inside the geometric mean.
///
/// Errors if the two slices differ in length, the corpus is empty, or
/// any instance has no references or an empty reference.
pub fn bleu_corpus(
    hypotheses: &[TokenSequence],
    references: &[Vec<TokenSequence>],
) -> Result<BleuScore> {
    if hypotheses.len() != references.len() {
        return Err(Error::InvalidInput(format!(
            "{} hypotheses but {} reference lists",
            hypotheses.len(),
            references.len()
        )));
    }
    if hypotheses.is_empty() {
        return Err(Error::InvalidInput("empty corpus".to_string()));
    }

    let mut numerators = [0u64; MAX_ORDER];
    let mut denominators = [0u64; MAX_ORDER];
    let mut hyp_len = 0u64;
    let mut ref_len = 0u64;

    for (hyp, refs) in hypotheses.iter().zip(references) {
        if refs.is_empty() {
            return Err(Error::InvalidInput(
                "instance has no references".to_string(),
            ));
        }
        if refs.iter().any(|r| r.is_empty()) {
            return Err(Error::InvalidInput("empty reference text".to_string()));
        }
        hyp_len += hyp.len() as u64;
        ref_len += closest_ref_len(hyp.len(), refs) as u64;

        for n in 1..=MAX_ORDER {
            if hyp.len() < n {
                continue;
            }
            let mut hyp_counts: HashMap<&[String], u64> = HashMap::new();
            for window in hyp.windows(n) {
                *hyp_counts.entry(window).or_insert(0) += 1;
            }
            let mut max_ref_counts: HashMap<&[String], u64> = HashMap::new();
            for reference in refs {
                if reference.len() < n {
                    continue;
                }
                let mut counts: HashMap<&[String], u64> = HashMap::new();
                for window in reference.windows(n) {
                    *counts.entry(window).or_insert(0) += 1;
                }
                for (gram, count) in counts {
                    let best = max_ref_counts.entry(gram).or_insert(0);
                    *best = (*best).max(count);
                }
            }
            for (gram, count) in &hyp_counts {
                numerators[n - 1] += (*count).min(max_ref_counts.get(gram).copied().unwrap_or(0));
            }
            denominators[n - 1] += (hyp.len() - n + 1) as u64;
        }
    }

    let precisions: Vec<f64> = (0..MAX_ORDER)
        .map(|i| {
            if denominators[i] == 0 {
                0.0
            } else {
                numerators[i] as f64 / denominators[i] as f64
            }
        })
        .collect();

    let log_sum: f64 = precisions
        .iter()
        .map(|&p| if p == 0.0 { DEFAULT_EPSILON } else { p }.ln())
        .sum();
    let geo_mean = (log_sum / MAX_ORDER as f64).exp();

    let brevity_penalty = if hyp_len > ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / hyp_len as f64).exp()
    };

    Ok(BleuScore {
        score: brevity_penalty * geo_mean,
        precisions,
        brevity_penalty,
        hypothesis_length: hyp_len,
        reference_length: ref_len,
    })
}

/// BLEU-T: corpus BLEU where every record value string of an instance's
/// table joins its reference list as an extra pseudo-reference, so that
/// copying table values verbatim earns n-gram credit. Values enter
/// individually, never concatenated, so matches cannot chain across
/// records.
pub fn bleu_t(instances: &[EvalInstance]) -> Result<BleuScore> {
    let hypotheses: Vec<TokenSequence> = instances.iter().map(|i| i.generation().clone()).collect();
    let references: Vec<Vec<TokenSequence>> = instances
        .iter()
        .map(|i| {
            let mut refs = i.references().to_vec();
            refs.extend(i.table().records().iter().map(|r| r.value().clone()));
            refs
        })
        .collect();
    bleu_corpus(&hypotheses, &references)
}

fn closest_ref_len(hyp_len: usize, refs: &[TokenSequence]) -> usize {
    refs.iter()
        .map(|r| r.len())
        .min_by_key(|&len| (len.abs_diff(hyp_len), len))
        .expect("non-empty reference list")
}
