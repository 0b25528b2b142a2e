use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("incompatible fields: {0}")]
    GridMismatch(String),

    #[error("field has zero norm (fully blocked)")]
    ZeroNorm,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The concurrence radicand `1 - 6b^2 - b^4` went negative.
    #[error("concurrence undefined for b = {b:.6} (requires |b| <= {limit:.5})")]
    ConcurrenceDomain { b: f64, limit: f64 },

    /// A numerical-domain failure at a particular sweep sample.
    #[error("at d/a = {d_over_a}: {source}")]
    AtSample {
        d_over_a: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("overlap imaginary residual {residual:.3e} exceeds {threshold:.1e}")]
    SymmetryViolation { residual: f64, threshold: f64 },

    #[error("config error at key `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    /// True for failures of the numerical model (domain errors, symmetry violations)
    /// as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::ConcurrenceDomain { .. } | Error::SymmetryViolation { .. } | Error::ZeroNorm => true,
            Error::AtSample { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
