//! N-gram counting, clipped counts, and longest common subsequence.

use std::collections::HashMap;

use crate::corpus::TokenSequence;
use crate::error::{Error, Result};

/// Highest n-gram order used anywhere in the crate.
pub const MAX_ORDER: usize = 4;

/// Multiset of the n-grams of one sequence at a single order.
///
/// Distinct n-grams are kept in first-occurrence order, so iteration,
/// and any floating-point sums over it, are deterministic functions of
/// the sequence alone.
#[derive(Debug, Clone)]
pub struct NGramCounts {
    order: usize,
    total: u64,
    grams: Vec<(Vec<String>, u64)>,
    index: HashMap<Vec<String>, usize>,
}

impl NGramCounts {
    pub fn order(&self) -> usize {
        self.order
    }

    /// Total number of n-gram occurrences: `max(0, len - n + 1)`.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Occurrence count of one n-gram (0 if absent).
    pub fn count(&self, gram: &[String]) -> u64 {
        self.index.get(gram).map_or(0, |&i| self.grams[i].1)
    }

    /// Iterates over distinct n-grams with their counts, in order of
    /// first occurrence.
    pub fn iter(&self) -> impl Iterator<Item = (&[String], u64)> {
        self.grams.iter().map(|(k, v)| (k.as_slice(), *v))
    }

    pub fn distinct(&self) -> usize {
        self.grams.len()
    }
}

/// Counts the n-grams of `seq` at order `n`.
///
/// Errors unless `1 <= n <= MAX_ORDER`. A sequence shorter than `n`
/// yields an empty multiset.
pub fn ngram_counts(seq: &TokenSequence, n: usize) -> Result<NGramCounts> {
    if !(1..=MAX_ORDER).contains(&n) {
        return Err(Error::InvalidInput(format!(
            "n-gram order must be in 1..={MAX_ORDER}, got {n}"
        )));
    }
    let mut grams: Vec<(Vec<String>, u64)> = Vec::new();
    let mut index: HashMap<Vec<String>, usize> = HashMap::new();
    let mut total = 0u64;
    if seq.len() >= n {
        for window in seq.windows(n) {
            match index.entry(window.to_vec()) {
                std::collections::hash_map::Entry::Occupied(slot) => {
                    grams[*slot.get()].1 += 1;
                }
                std::collections::hash_map::Entry::Vacant(slot) => {
                    slot.insert(grams.len());
                    grams.push((window.to_vec(), 1));
                }
            }
            total += 1;
        }
    }
    Ok(NGramCounts {
        order: n,
        total,
        grams,
        index,
    })
}

/// Count of `gram` in `a`, clipped by its count in `b`:
/// `min(a.count(gram), b.count(gram))`.
///
/// Errors if the orders of `gram`, `a`, and `b` disagree.
pub fn clipped_count(gram: &[String], a: &NGramCounts, b: &NGramCounts) -> Result<u64> {
    if a.order != b.order || gram.len() != a.order {
        return Err(Error::InvalidInput(format!(
            "order mismatch: gram has {}, counts have {} and {}",
            gram.len(),
            a.order,
            b.order
        )));
    }
    Ok(a.count(gram).min(b.count(gram)))
}

/// Length of the longest common subsequence of `x` and `y`.
pub fn lcs_len<T: PartialEq>(x: &[T], y: &[T]) -> usize {
    if x.is_empty() || y.is_empty() {
        return 0;
    }
    let mut prev = vec![0usize; y.len() + 1];
    let mut curr = vec![0usize; y.len() + 1];
    for xi in x {
        for (j, yj) in y.iter().enumerate() {
            curr[j + 1] = if xi == yj {
                prev[j] + 1
            } else {
                prev[j + 1].max(curr[j])
            };
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[y.len()]
}
