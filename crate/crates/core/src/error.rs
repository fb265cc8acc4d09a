use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Broad classes of failure, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// A caller-supplied parameter or shape is invalid.
    InvalidInput,
    /// The data cannot support the requested computation.
    Data,
    /// A numerical procedure failed.
    Numeric,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("no token reaches the minimum count in both corpora")]
    EmptyVocabulary,
    #[error("co-occurrence matrix is empty")]
    EmptyCooccurrences,
    #[error("co-occurrence accumulator overflowed")]
    CountOverflow,
    #[error("training diverged in epoch {epoch}: loss is not finite")]
    Divergence { epoch: usize },
    #[error("row {row} is exactly zero and cannot be normalized")]
    ZeroVector { row: usize },
    #[error("frequency direction is degenerate (norm {norm:e})")]
    DegenerateDirection { norm: f64 },
    #[error("matrix is rank deficient (singular value {singular_value:e})")]
    RankDeficient { singular_value: f64 },
    #[error("SVD did not converge after {sweeps} sweeps")]
    SvdNoConvergence { sweeps: usize },
    #[error("offset of word {word} is zero: it is embedded identically in both spaces")]
    ZeroOffset { word: usize },
    #[error("mean offset is degenerate (norm {norm:e})")]
    DegenerateMean { norm: f64 },
    #[error("correlation is undefined for constant input")]
    UndefinedCorrelation,
    #[error("cannot sample swap pairs: {0}")]
    InfeasibleSampling(String),
    #[error("unknown token `{0}`")]
    UnknownToken(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidParameter { .. } | Error::ShapeMismatch(_) => ErrorKind::InvalidInput,
            Error::Divergence { .. }
            | Error::SvdNoConvergence { .. }
            | Error::RankDeficient { .. }
            | Error::CountOverflow => ErrorKind::Numeric,
            _ => ErrorKind::Data,
        }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
