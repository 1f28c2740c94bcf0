//! Formula-based evaluation: readability grades and SARI.

mod external;
mod readability;
mod sari;
mod tokenize;

pub use external::{load_external_scores, merge_external_scores, ExternalScore};
pub use readability::{
    ari, corpus_readability, delta_report, fkgl, ReadabilityDelta, ReadabilityReport,
};
pub use sari::{sari_corpus, sari_sentence, SariScore, MAX_ORDER};
pub use tokenize::{count_syllables, tokenize, words, TokenizedSentence};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("corpus contains no words")]
    ZeroWords,
    #[error("no input sentences")]
    EmptyInput,
    #[error("reference list is empty")]
    EmptyRefs,
    #[error("length mismatch: {sources} sources, {outputs} outputs, {refs} reference lists")]
    LengthMismatch {
        sources: usize,
        outputs: usize,
        refs: usize,
    },
    #[error("malformed score record on line {0}")]
    MalformedRecord(usize),
    #[error("score record on line {line} names unknown condition {condition:?}")]
    UnknownCondition { line: usize, condition: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
