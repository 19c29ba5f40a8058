use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("unknown concept `{0}`")]
    UnknownConcept(String),

    #[error("format error at byte {offset}: {message}")]
    Format { offset: u64, message: String },

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("matrix is not positive semi-definite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("degenerate covariance: {0}")]
    DegenerateCovariance(String),

    #[error("projector is not idempotent (residual {residual:e})")]
    NotIdempotent { residual: f64 },

    #[error("fit failed: {message} (gradient norm {grad_norm:e})")]
    Fit { message: String, grad_norm: f64 },

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code for the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_)
            | Error::Config(_)
            | Error::Dimension(_)
            | Error::UnknownConcept(_)
            | Error::Format { .. }
            | Error::Protocol(_)
            | Error::Json(_)
            | Error::Csv(_) => 2,
            Error::Numerical(_)
            | Error::NotPsd { .. }
            | Error::DegenerateCovariance(_)
            | Error::NotIdempotent { .. }
            | Error::Fit { .. } => 3,
            Error::Io(_) => 4,
        }
    }

    /// Short machine-readable tag, used in structured error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid_input",
            Error::Config(_) => "config",
            Error::Dimension(_) => "dimension",
            Error::UnknownConcept(_) => "unknown_concept",
            Error::Format { .. } => "format",
            Error::Numerical(_) => "numerical",
            Error::NotPsd { .. } => "not_psd",
            Error::DegenerateCovariance(_) => "degenerate_covariance",
            Error::NotIdempotent { .. } => "not_idempotent",
            Error::Fit { .. } => "fit",
            Error::Protocol(_) => "protocol",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}
