use std::io;
use std::path::PathBuf;

use biont_core::corpus::CorpusError;
use biont_core::eval::EvalError;
use biont_core::instance::InstanceError;
use biont_core::model::ModelError;
use biont_core::onto::OntologyError;
use thiserror::Error;

/// A problem with the content of one input file. Line numbers are 1-based.
#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: malformed stanza: {reason}")]
    MalformedStanza { line: usize, reason: String },
    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("malformed XML: {0}")]
    MalformedXml(String),
    #[error("line {line}: malformed CoNLL-U: {reason}")]
    MalformedConllu { line: usize, reason: String },
    #[error("missing column {0:?}")]
    MissingColumn(String),
    #[error("line {line}: {source}")]
    Corpus { line: usize, source: CorpusError },
    #[error(transparent)]
    Ontology(#[from] OntologyError),
    #[error("line {line}: {source}")]
    Instance { line: usize, source: InstanceError },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("line {line}: {source}")]
    Json { line: usize, source: serde_json::Error },
    #[error("unsupported model file version {found:?}, expected {expected:?}")]
    VersionMismatch { found: String, expected: String },
}

/// Failure of a pipeline command.
#[derive(Debug, Error)]
pub enum PipelineError {
    /// The run configuration or the command line is invalid. Raised before
    /// any input is parsed.
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {source}", path.display())]
    Format { path: PathBuf, source: FormatError },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("{0}")]
    Data(String),
}

impl PipelineError {
    /// 1 for validation errors, 2 for errors in the data.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 1,
            _ => 2,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>) -> impl FnOnce(FormatError) -> PipelineError {
        let path = path.into();
        move |source| PipelineError::Format { path, source }
    }
}
