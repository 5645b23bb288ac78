//! Non-neural baseline metrics: corpus BLEU, BLEU-T, and extractive
//! content-selection / relation-generation scores.

mod bleu;
mod extractive;

pub use bleu::{bleu_corpus, bleu_t, BleuScore};
pub use extractive::{
    extractive_metrics, load_extractions, table_extraction_set, ExtractionSet, ExtractiveScores,
};
