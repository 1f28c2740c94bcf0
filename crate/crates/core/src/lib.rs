//! Embedding-space sentence simplification.
//!
//! Sentences are encoded to fixed-size vectors, mapped from the
//! complex-sentence region to the simple-sentence region by a small MLP, and
//! decoded back to text. The crate bundles the pieces needed to run and score
//! that pipeline offline:
//!
//! * [`corpus`]: TSV pair corpora and JSON Lines multi-reference corpora.
//! * [`metrics`]: FKGL, ARI and SARI, plus ingestion of precomputed scores.
//! * [`embedding`]: the EMB1 matrix format shared with external coders.
//! * [`toy_coder`]: a hashed n-gram encoder with a retrieval decoder.
//! * [`simplifier`]: the MLP, its Adam trainer and the MLP1 model format.
//! * [`experiments`]: reconstruction and simplification runs and reports.

pub mod corpus;
pub mod embedding;
pub mod experiments;
pub mod metrics;
pub mod rng;
pub mod simplifier;
pub mod toy_coder;

pub use corpus::{Lang, ParallelCorpus, Sentence};
pub use embedding::{Embedding, EmbeddingMatrix};
pub use simplifier::{MlpModel, TrainingConfig};
