use thiserror::Error;

/// Crate-wide error type. Variants carry enough context to be actionable
/// from a CLI without the caller re-deriving indices or line numbers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("instance exceeds the {guard} guard: {detail}")]
    GuardExceeded { guard: String, detail: String },

    #[error("unknown sku {0}")]
    UnknownSku(crate::SkuId),

    #[error("unknown location {0}")]
    UnknownLocation(crate::LocationId),

    #[error("transfer plan for sku {sku} ships {requested} units but the RDC holds {available}")]
    InfeasibleTransfer {
        sku: crate::SkuId,
        requested: u64,
        available: u64,
    },

    #[error("history too short: got {got} periods, need at least {need}")]
    ShortHistory { got: usize, need: usize },

    #[error("period {period}: {msg}")]
    PolicyFault { period: usize, msg: String },

    #[error("instance failed validation: {}", .0.join("; "))]
    Validation(Vec<String>),

    // Display omits the source; chain-walking reporters print it once.
    #[error("io error on {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
