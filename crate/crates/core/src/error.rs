use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cavity radius must be positive and finite, got {0}")]
    InvalidRadius(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("overlap matrix is not positive definite: eigenvalue {value:e} (largest {largest:e})")]
    NotPositiveDefinite { value: f64, largest: f64 },

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("optimal alpha {alpha} lies at the edge of [{lo}, {hi}]; widen the search range")]
    AlphaAtBoundary { alpha: f64, lo: f64, hi: f64 },

    #[error(
        "probability deficit {deficit:e} exceeds tolerance {tolerance:e} at n_m={n_m}, l_m={l_m}; \
         try n_m >= {hint_n_m}, l_m >= {hint_l_m}"
    )]
    ProbabilityDeficit {
        deficit: f64,
        tolerance: f64,
        n_m: usize,
        l_m: usize,
        hint_n_m: usize,
        hint_l_m: usize,
    },

    #[error("curve analysis: {0}")]
    Analysis(String),

    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
