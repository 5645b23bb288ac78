//! Data model and file I/O: tables, evaluation instances, co-occurrence
//! training pairs, and pairwise human judgments.
//!
//! All text is tokenized the same way everywhere: lowercase, split on
//! whitespace. Attribute names additionally split on underscores, so the
//! WikiBio-style key `birth_date` yields the tokens `birth date`. Numbers
//! and punctuation are ordinary tokens. Tokenization is frozen; there is
//! no configuration knob for it.

use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::ops::Deref;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lowercases `raw` and splits it on whitespace.
///
/// An empty or all-whitespace string yields an empty sequence.
pub fn tokenize(raw: &str) -> TokenSequence {
    TokenSequence {
        tokens: raw.split_whitespace().map(|t| t.to_lowercase()).collect(),
    }
}

/// Tokenizes an attribute name: lowercase, split on whitespace and
/// underscores.
///
/// Errors if no tokens survive (empty name).
pub fn attribute_tokens(raw: &str) -> Result<TokenSequence> {
    let tokens: Vec<String> = raw
        .split(|c: char| c.is_whitespace() || c == '_')
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
        .collect();
    if tokens.is_empty() {
        return Err(Error::InvalidInput(format!(
            "attribute name {raw:?} has no tokens"
        )));
    }
    Ok(TokenSequence { tokens })
}

/// An immutable, already-tokenized piece of text.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct TokenSequence {
    tokens: Vec<String>,
}

impl TokenSequence {
    /// Wraps pre-split tokens, rejecting empty tokens and tokens with
    /// internal whitespace.
    pub fn new(tokens: Vec<String>) -> Result<Self> {
        for t in &tokens {
            if t.is_empty() || t.chars().any(|c| c.is_whitespace()) {
                return Err(Error::InvalidInput(format!("malformed token {t:?}")));
            }
        }
        Ok(TokenSequence { tokens })
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Space-joined surface form; inverse of [`tokenize`] up to casing.
    pub fn joined(&self) -> String {
        self.tokens.join(" ")
    }
}

impl Deref for TokenSequence {
    type Target = [String];

    fn deref(&self) -> &[String] {
        &self.tokens
    }
}

impl fmt::Display for TokenSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.joined())
    }
}

/// One attribute/value row of a table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    attribute: TokenSequence,
    value: TokenSequence,
}

impl Record {
    /// Builds a record from raw attribute and value strings.
    ///
    /// Errors if either side tokenizes to nothing.
    pub fn new(attribute: &str, value: &str) -> Result<Self> {
        let attribute = attribute_tokens(attribute)?;
        let value = tokenize(value);
        if value.is_empty() {
            return Err(Error::InvalidInput(format!(
                "record value for attribute {:?} is empty",
                attribute.joined()
            )));
        }
        Ok(Record { attribute, value })
    }

    pub fn attribute(&self) -> &TokenSequence {
        &self.attribute
    }

    pub fn value(&self) -> &TokenSequence {
        &self.value
    }
}

/// A table: one or more attribute/value records.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    records: Vec<Record>,
}

impl Table {
    /// Errors if `records` is empty.
    pub fn new(records: Vec<Record>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::InvalidInput("table has no records".to_string()));
        }
        Ok(Table { records })
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    /// The set of all lexical items in the table: every attribute token
    /// and every value token. Invariant under record reordering.
    pub fn lexical_items(&self) -> LexicalItems {
        let mut items = HashSet::new();
        for record in &self.records {
            items.extend(record.attribute.iter().cloned());
            items.extend(record.value.iter().cloned());
        }
        LexicalItems { items }
    }
}

/// The deduplicated lexical items of a table (attribute and value tokens).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexicalItems {
    items: HashSet<String>,
}

impl LexicalItems {
    pub fn contains(&self, token: &str) -> bool {
        self.items.contains(token)
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.items.iter().map(|s| s.as_str())
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// One scoring unit: a table, one or more references, and a generation.
///
/// The generation may be empty (a system can emit nothing); references
/// may not.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalInstance {
    table: Table,
    references: Vec<TokenSequence>,
    generation: TokenSequence,
}

impl EvalInstance {
    pub fn new(
        table: Table,
        references: Vec<TokenSequence>,
        generation: TokenSequence,
    ) -> Result<Self> {
        if references.is_empty() {
            return Err(Error::InvalidInput(
                "instance has no references".to_string(),
            ));
        }
        if references.iter().any(|r| r.is_empty()) {
            return Err(Error::InvalidInput("empty reference text".to_string()));
        }
        Ok(EvalInstance {
            table,
            references,
            generation,
        })
    }

    pub fn table(&self) -> &Table {
        &self.table
    }

    pub fn references(&self) -> &[TokenSequence] {
        &self.references
    }

    pub fn generation(&self) -> &TokenSequence {
        &self.generation
    }
}

/// A (table, reference) pair used to train the co-occurrence model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainingPair {
    table: Table,
    reference: TokenSequence,
}

impl TrainingPair {
    pub fn new(table: Table, reference: TokenSequence) -> Result<Self> {
        if reference.is_empty() {
            return Err(Error::InvalidInput("empty reference text".to_string()));
        }
        Ok(TrainingPair { table, reference })
    }

    pub fn table(&self) -> &Table {
        &self.table
    }

    pub fn reference(&self) -> &TokenSequence {
        &self.reference
    }
}

/// Which side of a pairwise comparison the annotator preferred.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Winner {
    A,
    B,
}

/// One human pairwise judgment on a single instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Judgment {
    pub instance_id: String,
    pub system_a: String,
    pub system_b: String,
    pub winner: Winner,
}

/// A collection of pairwise judgments over a fixed set of systems.
#[derive(Debug, Clone, PartialEq)]
pub struct JudgmentSet {
    systems: Vec<String>,
    comparisons: Vec<Judgment>,
    /// Scaled per-system scores, if some scaling (e.g. Thurstone) has
    /// been applied; aligned with `systems`.
    pub per_system_scores: Option<Vec<f64>>,
}

impl JudgmentSet {
    /// Builds a set whose system list is derived from the comparisons
    /// (sorted, deduplicated).
    pub fn from_comparisons(comparisons: Vec<Judgment>) -> Result<Self> {
        let mut systems: Vec<String> = comparisons
            .iter()
            .flat_map(|c| [c.system_a.clone(), c.system_b.clone()])
            .collect();
        systems.sort();
        systems.dedup();
        Self::new(systems, comparisons)
    }

    /// Builds a set with an explicit system list.
    ///
    /// Errors if a comparison references an unlisted system or pits a
    /// system against itself.
    pub fn new(systems: Vec<String>, comparisons: Vec<Judgment>) -> Result<Self> {
        for c in &comparisons {
            if c.system_a == c.system_b {
                return Err(Error::InvalidInput(format!(
                    "comparison of system {:?} against itself",
                    c.system_a
                )));
            }
            for s in [&c.system_a, &c.system_b] {
                if !systems.contains(s) {
                    return Err(Error::InvalidInput(format!(
                        "comparison references unknown system {s:?}"
                    )));
                }
            }
        }
        Ok(JudgmentSet {
            systems,
            comparisons,
            per_system_scores: None,
        })
    }

    pub fn systems(&self) -> &[String] {
        &self.systems
    }

    pub fn comparisons(&self) -> &[Judgment] {
        &self.comparisons
    }
}

#[derive(Serialize, Deserialize)]
struct RawRecord {
    attribute: String,
    value: String,
}

#[derive(Serialize, Deserialize)]
struct RawInstance {
    table: Vec<RawRecord>,
    references: Vec<String>,
    generation: String,
}

#[derive(Deserialize)]
struct RawPair {
    table: Vec<RawRecord>,
    reference: String,
}

#[derive(Deserialize)]
struct RawJudgment {
    instance_id: String,
    system_a: String,
    system_b: String,
    winner: String,
}

fn table_from_raw(raw: Vec<RawRecord>) -> Result<Table> {
    let records = raw
        .into_iter()
        .map(|r| Record::new(&r.attribute, &r.value))
        .collect::<Result<Vec<_>>>()?;
    Table::new(records)
}

/// Runs `parse` on every non-blank line of a JSONL file, rewriting any
/// failure into a [`Error::Parse`] carrying the path and line number.
fn for_each_jsonl_line<T, F>(path: &Path, mut parse: F) -> Result<Vec<T>>
where
    F: FnMut(&str) -> Result<T>,
{
    let display = path.display().to_string();
    let file =
        File::open(path).map_err(|e| Error::InvalidInput(format!("cannot open {display}: {e}")))?;
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match parse(&line) {
            Ok(item) => out.push(item),
            Err(Error::Parse { msg, .. }) | Err(Error::InvalidInput(msg)) => {
                return Err(Error::parse(&display, idx + 1, msg));
            }
            Err(other) => return Err(other),
        }
    }
    Ok(out)
}

fn json_err(e: serde_json::Error) -> Error {
    Error::InvalidInput(e.to_string())
}

/// Loads evaluation instances from a JSONL file.
///
/// Each line is `{"table": [{"attribute", "value"}, ...],
/// "references": [...], "generation": "..."}`. Malformed lines are
/// reported with their line number.
pub fn load_instances(path: impl AsRef<Path>) -> Result<Vec<EvalInstance>> {
    for_each_jsonl_line(path.as_ref(), |line| {
        let raw: RawInstance = serde_json::from_str(line).map_err(json_err)?;
        EvalInstance::new(
            table_from_raw(raw.table)?,
            raw.references.iter().map(|r| tokenize(r)).collect(),
            tokenize(&raw.generation),
        )
    })
}

/// Writes instances back out as JSONL (lowercased, space-joined form).
///
/// Loading the result yields an instance list equal to the input.
pub fn save_instances(instances: &[EvalInstance], mut out: impl Write) -> Result<()> {
    for instance in instances {
        let raw = RawInstance {
            table: instance
                .table
                .records()
                .iter()
                .map(|r| RawRecord {
                    attribute: r.attribute().joined(),
                    value: r.value().joined(),
                })
                .collect(),
            references: instance.references.iter().map(|r| r.joined()).collect(),
            generation: instance.generation.joined(),
        };
        serde_json::to_writer(&mut out, &raw).map_err(|e| Error::Io(e.into()))?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Loads co-occurrence training pairs from a JSONL file of
/// `{"table": [...], "reference": "..."}` lines.
pub fn load_pairs(path: impl AsRef<Path>) -> Result<Vec<TrainingPair>> {
    for_each_jsonl_line(path.as_ref(), |line| {
        let raw: RawPair = serde_json::from_str(line).map_err(json_err)?;
        TrainingPair::new(table_from_raw(raw.table)?, tokenize(&raw.reference))
    })
}

/// Loads pairwise human judgments from a JSONL file of
/// `{"instance_id", "system_a", "system_b", "winner": "a"|"b"}` lines.
///
/// The system list is derived from the comparisons.
pub fn load_judgments(path: impl AsRef<Path>) -> Result<JudgmentSet> {
    let comparisons = for_each_jsonl_line(path.as_ref(), |line| {
        let raw: RawJudgment = serde_json::from_str(line).map_err(json_err)?;
        let winner = match raw.winner.as_str() {
            "a" => Winner::A,
            "b" => Winner::B,
            other => {
                return Err(Error::InvalidInput(format!(
                    "winner must be \"a\" or \"b\", got {other:?}"
                )))
            }
        };
        if raw.system_a == raw.system_b {
            return Err(Error::InvalidInput(format!(
                "comparison of system {:?} against itself",
                raw.system_a
            )));
        }
        Ok(Judgment {
            instance_id: raw.instance_id,
            system_a: raw.system_a,
            system_b: raw.system_b,
            winner,
        })
    })?;
    JudgmentSet::from_comparisons(comparisons)
}
