use thiserror::Error;

/// Errors produced by grid construction, operators and decompositions.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported dimension {0} (only 1 and 2 are supported)")]
    UnsupportedDimension(usize),
    #[error("samples per axis must be a power of two >= 8, got {0}")]
    InvalidSampleCount(usize),
    #[error("period length must be positive and finite, got {0}")]
    InvalidLength(f64),
    #[error("expected a {expected} function, found {found}")]
    DomainMismatch {
        expected: &'static str,
        found: &'static str,
    },
    #[error("operands live on different grids")]
    GridMismatch,
    #[error("scale {scale} is below the resolution floor {floor}")]
    ScaleUnderflow { scale: f64, floor: f64 },
    #[error("point lies outside the fundamental domain")]
    OutsideDomain,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("scale set is empty")]
    EmptyScaleSet,
    #[error("expected {expected} components, found {found}")]
    CountMismatch { expected: usize, found: usize },
    #[error("kernel has zero integral")]
    ZeroIntegral,
    #[error("open set covers the whole domain; no exterior to decompose against")]
    NoExterior,
    #[error("singular moment system (support {support} cells, condition number {condition:e})")]
    SingularGram { support: usize, condition: f64 },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("malformed data: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
