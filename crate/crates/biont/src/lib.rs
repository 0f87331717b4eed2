//! File formats, reports and the command pipeline around `biont-core`.

pub mod config;
pub mod conllu;
pub mod ddi;
pub mod error;
pub mod gaf;
pub mod jsonl;
pub mod model_file;
pub mod obo;
pub mod pgr;
pub mod pipeline;
pub mod pubtator;
pub mod reports;
pub mod tables;
pub mod vectors;

pub use error::{FormatError, PipelineError};

/// What a corpus reader does with a mention whose offsets do not match its
/// surface text.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum OffsetPolicy {
    /// Fail with the offending line.
    #[default]
    Reject,
    /// Drop the mention and every pair using it, counting both in the
    /// corpus diagnostics.
    Skip,
}
