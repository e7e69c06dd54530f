use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid config: {field}: {reason}")]
    InvalidConfig { field: &'static str, reason: String },

    #[error("invalid value: {0}")]
    InvalidValue(String),

    #[error("embedding dimensions differ ({0} vs {1})")]
    DimensionMismatch(usize, usize),

    #[error("cosine similarity undefined for two zero vectors")]
    ZeroVector,

    #[error("cosine similarity requested but no embedder configured")]
    MissingEmbedder,

    #[error("prompt slot `{0}` was not provided")]
    MissingSlot(String),

    #[error("backend unreachable: {0}")]
    BackendUnreachable(String),

    #[error("replay cache miss for key {0}")]
    ReplayMiss(String),

    #[error("backend returned HTTP status {0}")]
    HttpStatus(u16),

    #[error("backend request timed out")]
    Timeout,

    #[error("malformed backend response: {0}")]
    MalformedResponse(String),

    #[error("no parsable question/answer pairs in completion")]
    NoParsableQa,

    #[error("question generation produced no questions ({0})")]
    EmptyQuestionSet(&'static str),

    #[error("feedback list is empty")]
    EmptyFeedback,

    #[error("refinement returned a blank summary")]
    EmptyRevision,

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("no unit has two or more ratings")]
    InsufficientData,

    #[error("corpus rejected:{}", format_rejects(.0))]
    CorpusRejected(Vec<CorpusReject>),

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// One rejected corpus line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CorpusReject {
    Parse {
        line: usize,
        reason: String,
    },
    DuplicateKey {
        line: usize,
        doc_id: String,
        system_id: String,
    },
}

impl std::fmt::Display for CorpusReject {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CorpusReject::Parse { line, reason } => write!(f, "line {line}: {reason}"),
            CorpusReject::DuplicateKey {
                line,
                doc_id,
                system_id,
            } => {
                write!(f, "line {line}: duplicate key ({doc_id}, {system_id})")
            }
        }
    }
}

fn format_rejects(rejects: &[CorpusReject]) -> String {
    rejects.iter().map(|r| format!("\n  {r}")).collect()
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field,
            reason: reason.into(),
        }
    }

    /// Stable variant name, used in CLI messages and across the C ABI.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidConfig { .. } => "InvalidConfig",
            Error::InvalidValue(_) => "InvalidValue",
            Error::DimensionMismatch(..) => "DimensionMismatch",
            Error::ZeroVector => "ZeroVector",
            Error::MissingEmbedder => "MissingEmbedder",
            Error::MissingSlot(_) => "MissingSlot",
            Error::BackendUnreachable(_) => "BackendUnreachable",
            Error::ReplayMiss(_) => "ReplayMiss",
            Error::HttpStatus(_) => "HttpStatus",
            Error::Timeout => "Timeout",
            Error::MalformedResponse(_) => "MalformedResponse",
            Error::NoParsableQa => "NoParsableQA",
            Error::EmptyQuestionSet(_) => "EmptyQuestionSet",
            Error::EmptyFeedback => "EmptyFeedback",
            Error::EmptyRevision => "EmptyRevision",
            Error::DegenerateInput(_) => "DegenerateInput",
            Error::InsufficientData => "InsufficientData",
            Error::CorpusRejected(_) => "CorpusRejected",
            Error::EmptyCorpus => "EmptyCorpus",
            Error::Io { .. } => "IoError",
            Error::Json(_) => "Json",
        }
    }

    /// True for failures of the LLM backend or its replay cache, as opposed
    /// to bad input or configuration.
    pub fn is_backend_failure(&self) -> bool {
        matches!(
            self,
            Error::BackendUnreachable(_)
                | Error::ReplayMiss(_)
                | Error::HttpStatus(_)
                | Error::Timeout
                | Error::MalformedResponse(_)
                | Error::NoParsableQa
                | Error::EmptyQuestionSet(_)
                | Error::EmptyRevision
        )
    }
}
