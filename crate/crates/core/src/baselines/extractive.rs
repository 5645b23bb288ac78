//! Extractive evaluation: set comparisons over (attribute, value) pairs
//! produced by an external information-extraction system.
//!
//! Three scores per instance, all on exact pair equality after
//! tokenization and lowercasing:
//!
//! * content selection (CS): F1 of the generation's extractions against
//!   the reference's extractions;
//! * relation generation (RG): precision of the generation's
//!   extractions against the table's own pairs;
//! * RG-F: F1 of the generation's extractions against the table.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::Deserialize;
use serde::Serialize;

use crate::corpus::{attribute_tokens, tokenize, Table};
use crate::error::{Error, Result};

/// A set of extracted (attribute tokens, value tokens) pairs.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExtractionSet {
    pairs: BTreeSet<(Vec<String>, Vec<String>)>,
}

impl ExtractionSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one raw pair, tokenizing both sides (attributes also split
    /// on underscores). Errors if either side tokenizes to nothing.
    pub fn insert_raw(&mut self, attribute: &str, value: &str) -> Result<()> {
        let attribute = attribute_tokens(attribute)?;
        let value = tokenize(value);
        if value.is_empty() {
            return Err(Error::InvalidInput(format!(
                "extracted value for attribute {:?} is empty",
                attribute.joined()
            )));
        }
        self.pairs
            .insert((attribute.tokens().to_vec(), value.tokens().to_vec()));
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    fn intersection_size(&self, other: &ExtractionSet) -> usize {
        self.pairs.intersection(&other.pairs).count()
    }
}

/// The table's own records as an extraction set.
pub fn table_extraction_set(table: &Table) -> ExtractionSet {
    let mut set = ExtractionSet::new();
    for record in table.records() {
        set.pairs.insert((
            record.attribute().tokens().to_vec(),
            record.value().tokens().to_vec(),
        ));
    }
    set
}

/// Per-instance extractive scores.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtractiveScores {
    /// Content selection: F1 against the reference's extractions.
    pub cs: f64,
    /// Relation generation: precision against the table.
    pub rg: f64,
    /// F1 against the table.
    pub rg_f: f64,
}

/// Computes CS, RG, and RG-F for one instance's extraction sets.
///
/// Empty-vs-empty comparisons count as perfect (1.0); an empty set
/// against a non-empty one scores 0.
pub fn extractive_metrics(
    generated: &ExtractionSet,
    reference: &ExtractionSet,
    table: &Table,
) -> ExtractiveScores {
    let table_set = table_extraction_set(table);
    ExtractiveScores {
        cs: set_f1(generated, reference),
        rg: set_precision(generated, &table_set),
        rg_f: set_f1(generated, &table_set),
    }
}

fn set_precision(predicted: &ExtractionSet, target: &ExtractionSet) -> f64 {
    if predicted.is_empty() {
        return if target.is_empty() { 1.0 } else { 0.0 };
    }
    predicted.intersection_size(target) as f64 / predicted.len() as f64
}

fn set_f1(predicted: &ExtractionSet, target: &ExtractionSet) -> f64 {
    if predicted.is_empty() && target.is_empty() {
        return 1.0;
    }
    if predicted.is_empty() || target.is_empty() {
        return 0.0;
    }
    let p = set_precision(predicted, target);
    let r = set_precision(target, predicted);
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

#[derive(Deserialize)]
struct RawExtraction {
    index: usize,
    pairs: Vec<RawExtractionPair>,
}

#[derive(Deserialize)]
struct RawExtractionPair {
    attribute: String,
    value: String,
}

/// Loads per-instance extraction sets from a JSONL file of
/// `{"index": <instance index>, "pairs": [{"attribute", "value"}, ...]}`
/// lines. An empty `pairs` list is a valid (empty) extraction.
///
/// Errors on malformed lines or duplicate indices, with line numbers.
pub fn load_extractions(path: impl AsRef<Path>) -> Result<BTreeMap<usize, ExtractionSet>> {
    let display = path.as_ref().display().to_string();
    let file = File::open(path.as_ref())
        .map_err(|e| Error::InvalidInput(format!("cannot open {display}: {e}")))?;
    let mut out = BTreeMap::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawExtraction = serde_json::from_str(&line)
            .map_err(|e| Error::parse(&display, idx + 1, e.to_string()))?;
        let mut set = ExtractionSet::new();
        for pair in &raw.pairs {
            set.insert_raw(&pair.attribute, &pair.value)
                .map_err(|e| Error::parse(&display, idx + 1, e.to_string()))?;
        }
        if out.insert(raw.index, set).is_some() {
            return Err(Error::parse(
                &display,
                idx + 1,
                format!("duplicate extraction for instance {}", raw.index),
            ));
        }
    }
    Ok(out)
}
