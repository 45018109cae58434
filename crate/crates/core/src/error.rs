//! Crate-wide error type.

use crate::corpus::CrowdturfType;

/// Errors produced by corpus loading, featurization, training, and evaluation.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("{path}:{line}: malformed record: {message}")]
    MalformedRecord {
        path: String,
        line: usize,
        message: String,
    },

    #[error("duplicate gig id {0}")]
    DuplicateGigId(u64),

    #[error("duplicate seller id {0:?}")]
    DuplicateSellerId(String),

    #[error("gig {gig_id} references unknown seller {seller_id:?}")]
    DanglingSeller { gig_id: u64, seller_id: String },

    #[error("unknown gig id {0}")]
    UnknownGigId(u64),

    #[error("gig {0} has no label")]
    UnlabeledGig(u64),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no term meets the document-frequency threshold")]
    EmptyVocabulary,

    #[error("unknown stop-word list {0:?}")]
    UnknownStopwordList(String),

    #[error("fingerprint mismatch: expected {expected}, found {found}")]
    FingerprintMismatch { expected: String, found: String },

    #[error("training data contains a single class")]
    SingleClass,

    #[error("non-finite feature value at index {index}")]
    NonFiniteFeature { index: usize },

    #[error("crowdturfing type {0} has no training examples")]
    TypeAbsent(CrowdturfType),

    #[error("file format error: {0}")]
    ModelFormat(String),

    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn in_fold(self, fold: usize) -> Self {
        Error::Fold {
            fold,
            source: Box::new(self),
        }
    }
}
