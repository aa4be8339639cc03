use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Errors raised by the core algorithms.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{op}: input of length {got} is too short (need at least {needed})")]
    TooShort {
        op: &'static str,
        needed: usize,
        got: usize,
    },
    #[error("{op}: length {got} is not a multiple of {multiple}")]
    LengthNotMultiple {
        op: &'static str,
        multiple: usize,
        got: usize,
    },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("class {class} has {count} members, fewer than the {folds} folds requested")]
    ClassTooSmall {
        class: &'static str,
        count: usize,
        folds: usize,
    },
    #[error("row {row} has no stage label")]
    MissingLabel { row: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid label span: {0}")]
    InvalidSpan(String),
    #[error("unknown stage label `{0}`")]
    UnknownLabel(String),
    #[error("numerical failure in {op}: {detail}")]
    Numerical { op: &'static str, detail: String },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn numerical(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Numerical {
            op,
            detail: detail.into(),
        }
    }
}
