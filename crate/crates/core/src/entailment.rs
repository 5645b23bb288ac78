//! Entailment models: the probability that an n-gram is supported by a
//! table.
//!
//! Two lexical models are provided. [`WordOverlapModel`] needs no
//! training: the probability of an n-gram is the fraction of its tokens
//! that appear among the table's lexical items. [`CooccurrenceModel`] is
//! trained from (table, reference) pairs and scores each token by the
//! strongest co-occurrence with any single table item, combining tokens
//! by geometric mean. Both return values in `[0, 1]` and both see the
//! table only through its lexical item set.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::corpus::{LexicalItems, TrainingPair};
use crate::error::{Error, Result};

/// Assigns each n-gram a probability of being entailed by a table.
pub trait EntailmentModel: Send + Sync {
    /// Probability in `[0, 1]` that `ngram` is entailed by the table
    /// whose lexical items are `items`.
    fn ngram_prob(&self, ngram: &[String], items: &LexicalItems) -> f64;
}

/// Training-free model: the fraction of the n-gram's tokens that occur
/// in the table.
#[derive(Debug, Clone, Copy, Default)]
pub struct WordOverlapModel;

impl EntailmentModel for WordOverlapModel {
    fn ngram_prob(&self, ngram: &[String], items: &LexicalItems) -> f64 {
        if ngram.is_empty() {
            return 0.0;
        }
        let hits = ngram.iter().filter(|t| items.contains(t)).count();
        hits as f64 / ngram.len() as f64
    }
}

/// Co-occurrence model: `Pr(t <= v)` estimated per (text token, table
/// item) pair from training data.
///
/// For scoring, a token found directly in the table gets probability
/// 1.0; otherwise the maximum `Pr(t <= v)` over the table's items is
/// used; an n-gram combines its token probabilities by geometric mean
/// (0 if any token has probability 0).
#[derive(Debug, Clone, PartialEq)]
pub struct CooccurrenceModel {
    /// text token -> (table item -> probability).
    probs: HashMap<String, HashMap<String, f64>>,
    /// Number of training pairs the model was estimated from.
    pairs_seen: u64,
}

impl CooccurrenceModel {
    /// Probability that `token` is entailed by a table with lexical
    /// items `items`: 1.0 if the token itself is in the table, else the
    /// best co-occurrence probability against any item, else 0.0.
    pub fn token_prob(&self, token: &str, items: &LexicalItems) -> f64 {
        if items.contains(token) {
            return 1.0;
        }
        let Some(inner) = self.probs.get(token) else {
            return 0.0;
        };
        let mut best = 0.0f64;
        for item in items.iter() {
            if let Some(&p) = inner.get(item) {
                best = best.max(p);
            }
        }
        best
    }

    /// Number of stored (text token, table item) entries.
    pub fn entry_count(&self) -> usize {
        self.probs.values().map(HashMap::len).sum()
    }

    /// Number of training pairs the model saw.
    pub fn pairs_seen(&self) -> u64 {
        self.pairs_seen
    }

    /// Writes the model as TSV: a `#pairs=<N>` header, then one
    /// `text_token<TAB>table_token<TAB>probability` line per entry,
    /// sorted, with probabilities in full round-trip precision.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut sorted: BTreeMap<(&str, &str), f64> = BTreeMap::new();
        for (t, inner) in &self.probs {
            for (v, &p) in inner {
                sorted.insert((t, v), p);
            }
        }
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "#pairs={}", self.pairs_seen)?;
        for ((t, v), p) in sorted {
            writeln!(out, "{t}\t{v}\t{p}")?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads a model written by [`CooccurrenceModel::save`].
    ///
    /// Rejects a missing header, malformed lines, probabilities outside
    /// `[0, 1]`, and duplicate entries, naming the offending line.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let display = path.as_ref().display().to_string();
        let file = File::open(path.as_ref())
            .map_err(|e| Error::InvalidInput(format!("cannot open {display}: {e}")))?;
        let mut lines = BufReader::new(file).lines().enumerate();

        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse(&display, 1, "empty model file"))?;
        let header = header?;
        let pairs_seen = header
            .strip_prefix("#pairs=")
            .and_then(|s| s.parse::<u64>().ok())
            .ok_or_else(|| Error::parse(&display, 1, "expected #pairs=<N> header"))?;

        let mut probs: HashMap<String, HashMap<String, f64>> = HashMap::new();
        for (idx, line) in lines {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split('\t');
            let (Some(t), Some(v), Some(p), None) =
                (fields.next(), fields.next(), fields.next(), fields.next())
            else {
                return Err(Error::parse(
                    &display,
                    idx + 1,
                    "expected 3 tab-separated fields",
                ));
            };
            let p: f64 = p
                .parse()
                .map_err(|e| Error::parse(&display, idx + 1, format!("bad probability: {e}")))?;
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::parse(
                    &display,
                    idx + 1,
                    format!("probability {p} outside [0, 1]"),
                ));
            }
            if probs
                .entry(t.to_string())
                .or_default()
                .insert(v.to_string(), p)
                .is_some()
            {
                return Err(Error::parse(
                    &display,
                    idx + 1,
                    format!("duplicate entry for ({t}, {v})"),
                ));
            }
        }
        Ok(CooccurrenceModel { probs, pairs_seen })
    }
}

impl EntailmentModel for CooccurrenceModel {
    fn ngram_prob(&self, ngram: &[String], items: &LexicalItems) -> f64 {
        if ngram.is_empty() {
            return 0.0;
        }
        if let [token] = ngram {
            return self.token_prob(token, items);
        }
        let mut log_sum = 0.0;
        for token in ngram {
            let p = self.token_prob(token, items);
            if p == 0.0 {
                return 0.0;
            }
            log_sum += p.ln();
        }
        (log_sum / ngram.len() as f64).exp()
    }
}

/// Estimates a co-occurrence model from (table, reference) pairs.
///
/// `Pr(t <= v)` is the number of pairs whose reference contains `t` and
/// whose table contains item `v`, divided by the number of pairs whose
/// table contains `v` (pair-level presence, not token frequency). Only
/// entries whose joint count reaches `min_count` are stored; passing 1
/// keeps everything.
///
/// Errors on an empty pair list or `min_count` of 0.
pub fn train_cooccurrence(pairs: &[TrainingPair], min_count: u64) -> Result<CooccurrenceModel> {
    if pairs.is_empty() {
        return Err(Error::InvalidInput(
            "co-occurrence training needs at least one pair".to_string(),
        ));
    }
    if min_count == 0 {
        return Err(Error::InvalidInput(
            "min_count must be at least 1".to_string(),
        ));
    }

    let mut item_pairs: HashMap<String, u64> = HashMap::new();
    let mut joint: HashMap<String, HashMap<String, u64>> = HashMap::new();
    for pair in pairs {
        let items = pair.table().lexical_items();
        for v in items.iter() {
            *item_pairs.entry(v.to_string()).or_insert(0) += 1;
        }
        let ref_tokens: HashSet<&str> = pair.reference().iter().map(|s| s.as_str()).collect();
        for t in ref_tokens {
            let inner = joint.entry(t.to_string()).or_default();
            for v in items.iter() {
                *inner.entry(v.to_string()).or_insert(0) += 1;
            }
        }
    }

    let mut probs: HashMap<String, HashMap<String, f64>> = HashMap::new();
    for (t, inner) in joint {
        for (v, count) in inner {
            if count < min_count {
                continue;
            }
            let p = count as f64 / item_pairs[&v] as f64;
            probs.entry(t.clone()).or_default().insert(v, p);
        }
    }
    Ok(CooccurrenceModel {
        probs,
        pairs_seen: pairs.len() as u64,
    })
}
