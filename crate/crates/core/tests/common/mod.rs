//! Brute-force oracles and synthetic data generators shared by the
//! integration suites.
//!
//! The oracles recompute every quantity straight from its definition
//! over plain token vectors, deliberately with different machinery
//! than the library: positional window scans instead of hashed n-gram
//! tables, memoized recursion instead of the rolling-array LCS, and
//! `powf` instead of log-space geometric means.

#![allow(dead_code)]

use std::collections::HashMap;

use parent_core::corpus::{tokenize, EvalInstance, Record, Table};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn instance(records: &[(&str, &str)], references: &[&str], generation: &str) -> EvalInstance {
    EvalInstance::new(
        table(records),
        references.iter().map(|r| tokenize(r)).collect(),
        tokenize(generation),
    )
    .unwrap()
}

pub fn table(records: &[(&str, &str)]) -> Table {
    Table::new(
        records
            .iter()
            .map(|(a, v)| Record::new(a, v).unwrap())
            .collect(),
    )
    .unwrap()
}

pub fn toks(raw: &str) -> Vec<String> {
    raw.split_whitespace().map(|t| t.to_lowercase()).collect()
}

/// Every attribute token (underscores split) and value token of the
/// table, deduplicated by sorting.
pub fn items_of(records: &[(&str, &str)]) -> Vec<String> {
    let mut items = Vec::new();
    for (attribute, value) in records {
        items.extend(
            attribute
                .split(|c: char| c.is_whitespace() || c == '_')
                .filter(|t| !t.is_empty())
                .map(|t| t.to_lowercase()),
        );
        items.extend(toks(value));
    }
    items.sort();
    items.dedup();
    items
}

fn windows(tokens: &[String], n: usize) -> Vec<&[String]> {
    if n == 0 || tokens.len() < n {
        return Vec::new();
    }
    (0..=tokens.len() - n).map(|i| &tokens[i..i + n]).collect()
}

fn count_in(gram: &[String], tokens: &[String]) -> u64 {
    windows(tokens, gram.len())
        .iter()
        .filter(|w| **w == gram)
        .count() as u64
}

fn overlap(gram: &[String], items: &[String]) -> f64 {
    let hits = gram
        .iter()
        .filter(|t| items.binary_search(t).is_ok())
        .count();
    hits as f64 / gram.len() as f64
}

fn lcs_memo(
    x: &[String],
    y: &[String],
    i: usize,
    j: usize,
    memo: &mut HashMap<(usize, usize), usize>,
) -> usize {
    if i == 0 || j == 0 {
        return 0;
    }
    if let Some(&v) = memo.get(&(i, j)) {
        return v;
    }
    let v = if x[i - 1] == y[j - 1] {
        lcs_memo(x, y, i - 1, j - 1, memo) + 1
    } else {
        lcs_memo(x, y, i - 1, j, memo).max(lcs_memo(x, y, i, j - 1, memo))
    };
    memo.insert((i, j), v);
    v
}

pub fn oracle_lcs(x: &[String], y: &[String]) -> usize {
    lcs_memo(x, y, x.len(), y.len(), &mut HashMap::new())
}

/// Plain clipped n-gram precision as an integer ratio; `None` when the
/// generation has no n-grams of this order.
pub fn clipped_precision(g: &[String], r: &[String], n: usize) -> Option<f64> {
    let gs = windows(g, n);
    if gs.is_empty() {
        return None;
    }
    let mut num = 0u64;
    for (i, gram) in gs.iter().enumerate() {
        if gs[..i].iter().any(|earlier| earlier == gram) {
            continue;
        }
        num += count_in(gram, g).min(count_in(gram, r));
    }
    Some(num as f64 / gs.len() as f64)
}

/// Plain clipped n-gram recall; `None` when the reference has no
/// n-grams of this order.
pub fn clipped_recall(g: &[String], r: &[String], n: usize) -> Option<f64> {
    let rs = windows(r, n);
    if rs.is_empty() {
        return None;
    }
    let mut num = 0u64;
    for (i, gram) in rs.iter().enumerate() {
        if rs[..i].iter().any(|earlier| earlier == gram) {
            continue;
        }
        num += count_in(gram, r).min(count_in(gram, g));
    }
    Some(num as f64 / rs.len() as f64)
}

pub fn geo_mean(components: &[Option<f64>], epsilon: f64) -> f64 {
    let floored: Vec<f64> = components
        .iter()
        .flatten()
        .map(|&v| if v == 0.0 { epsilon } else { v })
        .collect();
    if floored.is_empty() {
        return epsilon;
    }
    let product: f64 = floored.iter().product();
    product.powf(1.0 / floored.len() as f64)
}

#[derive(Debug, Clone)]
pub struct OracleScore {
    pub precision_by_order: Vec<Option<f64>>,
    pub e_p: f64,
    pub recall_by_order: Vec<Option<f64>>,
    pub e_r_ref: f64,
    pub e_r_table: f64,
    pub lambda: f64,
    pub e_r: f64,
    pub f_score: f64,
    pub ref_index: usize,
}

#[derive(Debug, Clone, Copy)]
pub enum OracleLambda {
    Auto,
    Fixed(f64),
}

fn precision_order(
    g: &[String],
    r: &[String],
    items: &[String],
    ablate: bool,
    n: usize,
) -> Option<f64> {
    let gs = windows(g, n);
    if gs.is_empty() {
        return None;
    }
    let mut num = 0.0;
    for (i, gram) in gs.iter().enumerate() {
        if gs[..i].iter().any(|earlier| earlier == gram) {
            continue;
        }
        let in_g = count_in(gram, g);
        let clipped = in_g.min(count_in(gram, r));
        let w = if ablate { 0.0 } else { overlap(gram, items) };
        num += in_g as f64 * w + clipped as f64 * (1.0 - w);
    }
    Some(num / gs.len() as f64)
}

fn recall_order(
    g: &[String],
    r: &[String],
    items: &[String],
    ablate: bool,
    n: usize,
) -> Option<f64> {
    let rs = windows(r, n);
    if rs.is_empty() {
        return None;
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, gram) in rs.iter().enumerate() {
        if rs[..i].iter().any(|earlier| earlier == gram) {
            continue;
        }
        let in_r = count_in(gram, r);
        let clipped = in_r.min(count_in(gram, g));
        let w = if ablate { 1.0 } else { overlap(gram, items) };
        num += clipped as f64 * w;
        den += in_r as f64 * w;
    }
    if den == 0.0 {
        None
    } else {
        Some(num / den)
    }
}

fn table_recall_of(text: &[String], values: &[Vec<String>]) -> f64 {
    let sum: f64 = values
        .iter()
        .map(|v| oracle_lcs(v, text) as f64 / v.len() as f64)
        .sum();
    sum / values.len() as f64
}

/// Sums the score definition directly for one instance; the best
/// reference wins by strict F-score comparison, so ties keep the
/// lowest index.
pub fn oracle_parent(
    records: &[(&str, &str)],
    references: &[&str],
    generation: &str,
    lambda: OracleLambda,
    epsilon: f64,
    max_order: usize,
    ablate: bool,
) -> OracleScore {
    let g = toks(generation);
    let items = items_of(records);
    let values: Vec<Vec<String>> = records.iter().map(|(_, v)| toks(v)).collect();
    let e_r_table = table_recall_of(&g, &values);

    let mut best: Option<OracleScore> = None;
    for (ref_index, raw) in references.iter().enumerate() {
        let r = toks(raw);
        let precision_by_order: Vec<Option<f64>> = (1..=max_order)
            .map(|n| precision_order(&g, &r, &items, ablate, n))
            .collect();
        let recall_by_order: Vec<Option<f64>> = (1..=max_order)
            .map(|n| recall_order(&g, &r, &items, ablate, n))
            .collect();
        let e_p = geo_mean(&precision_by_order, epsilon);
        let e_r_ref = geo_mean(&recall_by_order, epsilon);
        let lambda_used = match lambda {
            OracleLambda::Auto => (1.0 - table_recall_of(&r, &values)).clamp(0.0, 1.0),
            OracleLambda::Fixed(l) => l,
        };
        let floored_ref = if e_r_ref == 0.0 { epsilon } else { e_r_ref };
        let floored_table = if e_r_table == 0.0 { epsilon } else { e_r_table };
        let e_r = if lambda_used == 0.0 {
            floored_ref
        } else if lambda_used == 1.0 {
            floored_table
        } else {
            floored_ref.powf(1.0 - lambda_used) * floored_table.powf(lambda_used)
        };
        let f_score = if e_p + e_r > 0.0 {
            2.0 * e_p * e_r / (e_p + e_r)
        } else {
            0.0
        };
        let score = OracleScore {
            precision_by_order,
            e_p,
            recall_by_order,
            e_r_ref,
            e_r_table,
            lambda: lambda_used,
            e_r,
            f_score,
            ref_index,
        };
        if best.as_ref().is_none_or(|b| score.f_score > b.f_score) {
            best = Some(score);
        }
    }
    best.expect("at least one reference")
}

#[derive(Debug, Clone)]
pub struct OracleBleu {
    pub score: f64,
    pub precisions: Vec<f64>,
    pub brevity_penalty: f64,
    pub hyp_len: u64,
    pub ref_len: u64,
}

/// Corpus BLEU-4 from the definition: per-gram clipping at the maximum
/// reference count, summed numerators and denominators, closest
/// reference length with ties toward the shorter.
pub fn oracle_bleu(hyps: &[Vec<String>], refs: &[Vec<Vec<String>>], epsilon: f64) -> OracleBleu {
    let mut numerators = [0u64; 4];
    let mut denominators = [0u64; 4];
    let mut hyp_len = 0u64;
    let mut ref_len = 0u64;

    for (hyp, ref_set) in hyps.iter().zip(refs) {
        hyp_len += hyp.len() as u64;
        ref_len += ref_set
            .iter()
            .map(|r| r.len())
            .min_by_key(|&len| (len.abs_diff(hyp.len()), len))
            .expect("non-empty reference set") as u64;
        for n in 1..=4 {
            let hs = windows(hyp, n);
            denominators[n - 1] += hs.len() as u64;
            for (i, gram) in hs.iter().enumerate() {
                if hs[..i].iter().any(|earlier| earlier == gram) {
                    continue;
                }
                let best_ref = ref_set.iter().map(|r| count_in(gram, r)).max().unwrap();
                numerators[n - 1] += count_in(gram, hyp).min(best_ref);
            }
        }
    }

    let precisions: Vec<f64> = (0..4)
        .map(|i| {
            if denominators[i] == 0 {
                0.0
            } else {
                numerators[i] as f64 / denominators[i] as f64
            }
        })
        .collect();
    let product: f64 = precisions
        .iter()
        .map(|&p| if p == 0.0 { epsilon } else { p })
        .product();
    let geo = product.powf(0.25);
    let brevity_penalty = if hyp_len > ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / hyp_len as f64).exp()
    };
    OracleBleu {
        score: brevity_penalty * geo,
        precisions,
        brevity_penalty,
        hyp_len,
        ref_len,
    }
}

const VOCAB: usize = 25;

pub fn random_text(rng: &mut ChaCha8Rng, len_range: std::ops::RangeInclusive<usize>) -> String {
    let len = rng.random_range(len_range);
    (0..len)
        .map(|_| format!("w{:02}", rng.random_range(0..VOCAB)))
        .collect::<Vec<_>>()
        .join(" ")
}

/// A raw random instance: 1 to 10 records with 1-to-4-token values,
/// one or two 5-to-25-token references, a 5-to-25-token generation,
/// all drawn from a 25-word vocabulary so overlaps actually happen.
pub fn random_raw_instance(rng: &mut ChaCha8Rng) -> (Vec<(String, String)>, Vec<String>, String) {
    let n_records = rng.random_range(1..=10);
    let records: Vec<(String, String)> = (0..n_records)
        .map(|i| (format!("attr_{i}"), random_text(rng, 1..=4)))
        .collect();
    let n_refs = rng.random_range(1..=2);
    let references: Vec<String> = (0..n_refs).map(|_| random_text(rng, 5..=25)).collect();
    let generation = random_text(rng, 5..=25);
    (records, references, generation)
}

pub fn to_instance(
    records: &[(String, String)],
    references: &[String],
    generation: &str,
) -> EvalInstance {
    let borrowed: Vec<(&str, &str)> = records
        .iter()
        .map(|(a, v)| (a.as_str(), v.as_str()))
        .collect();
    EvalInstance::new(
        table(&borrowed),
        references.iter().map(|r| tokenize(r)).collect(),
        tokenize(generation),
    )
    .unwrap()
}

/// A small random corpus for the BLEU-T dominance check. Table values
/// stay strictly shorter than every reference and generation, so the
/// table pseudo-references can only shrink the effective reference
/// length, and the corpus stays small enough that any nonzero clipped
/// precision sits above the smoothing floor. Every generation starts
/// with its reference's first token. With `plant`, one generation gets
/// a reserved token that also lands in a table value but in no
/// reference, which forces a strict BLEU-T gain.
pub fn random_bleu_corpus(rng: &mut ChaCha8Rng, plant: bool) -> Vec<EvalInstance> {
    let n_instances = rng.random_range(2..=12);
    let planted_at = rng.random_range(0..n_instances);
    (0..n_instances)
        .map(|i| {
            let reference = random_text(rng, 5..=25);
            let first = reference.split(' ').next().unwrap().to_string();
            let mut gen_tokens = vec![first];
            gen_tokens.extend(toks(&random_text(rng, 4..=24)));
            let mut records = vec![
                ("value_a".to_string(), random_text(rng, 1..=4)),
                ("value_b".to_string(), random_text(rng, 1..=4)),
            ];
            if plant && i == planted_at {
                records.push(("planted".to_string(), "zq zr".to_string()));
                gen_tokens.push("zq".to_string());
            }
            to_instance(&records, &[reference], &gen_tokens.join(" "))
        })
        .collect()
}
