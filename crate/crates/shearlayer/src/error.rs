use num_complex::Complex64;

/// Errors shared across the crate.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// An input was outside its mathematical domain (non-finite, wrong sign, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Moduli violate the strong-ellipticity conditions
    /// `alpha > 0`, `gamma > 0`, `beta > -sqrt(alpha*gamma)`.
    #[error("inadmissible moduli: {0}")]
    Admissibility(String),

    /// Root set is not closed under complex conjugation within tolerance,
    /// so barred/unbarred labels cannot be assigned.
    #[error("root pairing failed: {0}")]
    Pairing(String),

    /// The quartic solver could not reduce every root residual below
    /// tolerance. Best-effort roots and their residuals are attached.
    #[error("quartic solver did not converge (worst residual {worst:.3e})")]
    NonConvergence {
        roots: [Complex64; 4],
        residuals: [f64; 4],
        worst: f64,
    },

    /// A numerical evaluation produced a non-finite value or an iteration
    /// failed to converge.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A sweep or CLI configuration value is invalid. `field` names the
    /// offending entry.
    #[error("invalid configuration: field `{field}`: {message}")]
    Config { field: String, message: String },

    /// Reading or writing an output destination failed.
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Configuration error naming the offending field.
    pub fn config(field: &str, msg: impl Into<String>) -> Self {
        Error::Config {
            field: field.to_string(),
            message: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
