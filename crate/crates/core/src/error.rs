use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A constructed value violates a documented bound. `field` names the offending input.
    #[error("invalid {field}: {message}")]
    Invalid { field: String, message: String },

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("generation failed at level {level}: {message}")]
    Generation { level: usize, message: String },

    #[error("batch sample {sample} (seed stream {seed}) failed: {source}")]
    Sample {
        sample: u64,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("unsupported regime: {0}")]
    Unsupported(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("Morrow correction invalid: mean normal stress {mean} MPa >= fatigue strength coefficient {sigma_f} MPa")]
    MorrowDomain { mean: f64, sigma_f: f64 },

    #[error("numerical failure: {message} (residual {residual:e})")]
    Numerical { message: String, residual: f64 },

    #[error("format error: {0}")]
    Format(String),

    #[error("config error at {path}: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by user input rather than numerical breakdown.
    pub fn is_user_error(&self) -> bool {
        !matches!(self, Error::Numerical { .. })
            && !matches!(self, Error::Sample { source, .. } if !source.is_user_error())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
