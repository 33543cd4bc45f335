//! Phrase-based statistical machine translation, end to end: corpus
//! cleaning and tokenization for Indic and Latin scripts, truecasing,
//! IBM word alignment with grow-diag symmetrization, phrase extraction,
//! an n-gram language model with ARPA round-tripping, a beam-stack
//! decoder, greedy weight tuning, and BLEU / RIBES / METEOR scoring.
//!
//! Everything is deterministic: no randomness, sorted iteration wherever
//! output order matters, and byte-identical artifacts on repeated runs.

pub mod align;
pub mod corpus;
pub mod decode;
pub mod error;
pub mod eval;
pub mod lm;
pub mod phrase;
pub mod pipeline;
pub mod preprocess;
pub mod tune;

pub use error::{Result, SmtError};
