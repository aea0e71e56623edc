use thiserror::Error;

use crate::search::ScoringParams;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Ingest { line: usize, message: String },

    #[error("duplicate paragraph {article_id}#{order}")]
    DuplicateParagraph { article_id: String, order: u64 },

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("article `{0}` has no paragraphs")]
    EmptyArticle(String),

    #[error("paragraph `{0}` has no tokens")]
    EmptyParagraph(String),

    #[error("unknown paragraph `{0}`")]
    UnknownParagraph(String),

    #[error("unknown article `{0}`")]
    UnknownArticle(String),

    #[error("query term `{0}` is not normalized")]
    UnnormalizedTerm(String),

    #[error("k must be at least 1")]
    ZeroK,

    #[error("no overlap between reasoning path and target `{0}`: untrainable example")]
    Untrainable(String),

    #[error("{0}")]
    InvalidArgument(String),

    #[error("index format: {0}")]
    IndexFormat(String),

    #[error("index built with {found:?}, expected {expected:?}")]
    ParamsMismatch {
        found: ScoringParams,
        expected: ScoringParams,
    },

    #[error("model manifest: {0}")]
    Manifest(String),

    #[error("external model: {0}")]
    External(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
