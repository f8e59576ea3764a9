use thiserror::Error;

/// Errors raised by the tensor, jet, model and curvature layers.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("variance mismatch: contraction needs one upper and one lower slot (slots {0} and {1})")]
    VarianceMismatch(usize, usize),

    #[error("slot {slot} out of range for rank {rank}")]
    SlotOutOfRange { slot: usize, rank: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("rank {0} exceeds the supported maximum of 5")]
    RankTooLarge(usize),

    #[error("non-finite component produced by {0}")]
    NonFinite(&'static str),

    #[error("singular metric")]
    SingularMetric,

    #[error("asymmetric factor: residual {0:e}")]
    AsymmetricFactor(f64),

    #[error("jet division singularity")]
    JetDivisionSingularity,

    #[error("jet dimension mismatch: {0} vs {1} variables")]
    JetDimensionMismatch(usize, usize),

    #[error("domain error in {func}: argument {arg}")]
    Domain { func: &'static str, arg: f64 },

    #[error("missing derivative data: {0}")]
    MissingDerivative(&'static str),

    #[error("Weyl undefined for n = {0} (needs n >= 4)")]
    WeylUndefined(usize),

    #[error("unknown model '{0}'")]
    UnknownModel(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty sample")]
    EmptySample,

    #[error("expression error: {0}")]
    Expression(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("unknown identity '{0}'")]
    UnknownIdentity(String),
}

pub type Result<T> = std::result::Result<T, Error>;
