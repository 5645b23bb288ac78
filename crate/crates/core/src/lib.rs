//! Reference-aware evaluation for table-to-text generation.
//!
//! The centerpiece is the PARENT metric: an entailed n-gram
//! precision/recall F-score that credits a generation both for matching
//! the written reference and for stating facts that the source table
//! itself supports. Around it sit the usual non-neural baselines (corpus
//! BLEU, BLEU-T, extractive content-selection and relation-generation
//! scores) and a meta-evaluation toolkit (Thurstone scaling of pairwise
//! human judgments, bootstrap correlation estimates with significance
//! tests, McNemar's test, entailment-sliced subsampling).
//!
//! # Example
//!
//! ```
//! use parent_core::corpus::{EvalInstance, Record, Table, tokenize};
//! use parent_core::entailment::WordOverlapModel;
//! use parent_core::parent::{parent_instance, ParentConfig};
//!
//! let table = Table::new(vec![
//!     Record::new("name", "john doe").unwrap(),
//!     Record::new("born", "1980").unwrap(),
//! ])
//! .unwrap();
//! let instance = EvalInstance::new(
//!     table,
//!     vec![tokenize("john doe born 1980")],
//!     tokenize("john doe was born 1980"),
//! )
//! .unwrap();
//!
//! let model = WordOverlapModel;
//! let score = parent_instance(&instance, &ParentConfig::new(&model));
//! assert!(score.f_score > 0.0 && score.f_score <= 1.0);
//! ```

pub mod baselines;
pub mod corpus;
pub mod entailment;
mod error;
pub mod metaeval;
pub mod ngrams;
pub mod parent;

pub use error::{Error, Result};

/// Smoothing constant assigned to zero-valued precision/recall components.
pub const DEFAULT_EPSILON: f64 = 1e-5;
