use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A profile or special function was evaluated outside its domain.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("inconsistent parameters: {}", .0.join("; "))]
    InconsistentParams(Vec<String>),

    #[error("singular leading symbol at xi = {xi:?}")]
    SingularSymbol { xi: [f64; 4] },

    #[error("quadrature needs at least {min} nodes per direction, got {got}")]
    TooFewNodes { min: usize, got: usize },

    #[error("torsion profile is non-zero at t = {t}; pass allow_torsion to integrate it anyway")]
    TorsionNotAllowed { t: f64 },

    #[error("no real root for the constraint: 6 a1 v1^2 would have to equal {rhs}")]
    NoRealRoot { rhs: f64 },

    #[error("scale factor {value} fell below the collapse threshold {threshold}")]
    Collapse { value: f64, threshold: f64 },

    #[error("adaptive step underflow at t = {t} (step {step})")]
    StepUnderflow { t: f64, step: f64 },

    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),

    #[error("trajectory error: {0}")]
    Trajectory(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
