use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("not a density matrix: {0}")]
    InvalidState(String),

    #[error("unphysical Bloch parameters: minimum eigenvalue {min_eigenvalue:e}")]
    UnphysicalBloch { min_eigenvalue: f64 },

    #[error("unphysical Bell-diagonal triple {c:?}: {reason}")]
    UnphysicalBell { c: [f64; 3], reason: String },

    #[error("Kraus set is not trace preserving (max deviation {deviation:e})")]
    NotTracePreserving { deviation: f64 },

    #[error("overdamped regime unsupported: lambda = {lam} >= 2 * gamma = {}", 2.0 * .gam)]
    Overdamped { lam: f64, gam: f64 },

    #[error("grid point {index} (t = {t}): {source}")]
    AtGridPoint {
        index: usize,
        t: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}

/// Checks `lo <= value <= hi` (and finiteness).
pub(crate) fn check_range(name: &'static str, value: f64, lo: f64, hi: f64, range: &'static str) -> Result<()> {
    if value.is_finite() && value >= lo && value <= hi {
        Ok(())
    } else {
        Err(Error::OutOfRange { name, value, range })
    }
}
