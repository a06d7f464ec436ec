use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error(
        "Drude pole collides with Matsubara frequency nu_{index} (beta * omega_c = {beta_omega_c})"
    )]
    PoleCollision { beta_omega_c: f64, index: u64 },

    #[error("degenerate spectrum: levels {n} and {m} differ by {gap:e} hartree")]
    DegenerateSpectrum { n: usize, m: usize, gap: f64 },

    #[error("{what} failed after {iterations} iterations: {detail}")]
    NumericalFailure {
        what: &'static str,
        iterations: usize,
        detail: String,
    },

    #[error("non-finite state encountered at t = {time} a.u.")]
    NonFinite { time: f64 },

    #[error("not available: {0}")]
    NotAvailable(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
