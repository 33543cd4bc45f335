//! Error type shared across the toolkit.

use std::path::PathBuf;

/// Everything that can go wrong inside the library.
#[derive(Debug, thiserror::Error)]
pub enum SmtError {
    /// The two sides of a parallel corpus have different line counts.
    #[error("line count mismatch: {src_path} has {src_lines} lines, {tgt_path} has {tgt_lines}")]
    LineCountMismatch {
        src_path: PathBuf,
        src_lines: usize,
        tgt_path: PathBuf,
        tgt_lines: usize,
    },

    /// A corpus file contains bytes that are not valid UTF-8.
    #[error("{path}: line {line} is not valid UTF-8")]
    InvalidUtf8 { path: PathBuf, line: usize },

    /// An operation that needs at least one sentence pair got none.
    #[error("empty corpus: {0}")]
    EmptyCorpus(String),

    /// A language tag has no registered profile.
    #[error("unknown language code `{0}`")]
    UnknownLanguage(String),

    /// A language profile failed validation.
    #[error("invalid language profile `{code}`: {reason}")]
    InvalidProfile { code: String, reason: String },

    /// Matrix or sequence sizes do not line up.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A caller-supplied knob is outside its legal range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A derivation does not describe a valid segmentation of its source.
    #[error("invalid derivation: {0}")]
    InvalidDerivation(String),

    /// A model or data file is syntactically broken.
    #[error("{path}: line {line}: {message}")]
    ParseError {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// A model directory is missing a required artifact.
    #[error("model directory incomplete: missing {0}")]
    IncompleteModel(PathBuf),

    /// The run configuration is unusable.
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("{path}: {source}")]
    JsonFile {
        path: PathBuf,
        source: serde_json::Error,
    },
}

impl SmtError {
    /// Process exit code for the CLI: 1 usage/config, 2 data, 3 internal.
    pub fn exit_code(&self) -> u8 {
        match self {
            SmtError::UnknownLanguage(_)
            | SmtError::InvalidParameter(_)
            | SmtError::Config(_) => 1,
            SmtError::LineCountMismatch { .. }
            | SmtError::InvalidUtf8 { .. }
            | SmtError::EmptyCorpus(_)
            | SmtError::InvalidProfile { .. }
            | SmtError::DimensionMismatch(_)
            | SmtError::InvalidDerivation(_)
            | SmtError::ParseError { .. }
            | SmtError::IncompleteModel(_)
            | SmtError::JsonFile { .. } => 2,
            SmtError::Io(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, SmtError>;
