use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// The temperature exponent is outside the self-similar family (ω must exceed −1),
    /// or a derived quantity is not representable.
    #[error("domain error: {0}")]
    Domain(String),

    /// A right-hand side was evaluated on its singular set. `numerator` is the value of
    /// the numerator there; it is ~0 at the critical point and nonzero on a turning point.
    #[error("singular right-hand side at {location} (numerator = {numerator:e})")]
    Singularity { location: String, numerator: f64 },

    #[error("invalid controls: {0}")]
    InvalidControls(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("profile does not cover eta = {eta} (domain ends at {eta_max}) and has no front")]
    Coverage { eta: f64, eta_max: f64 },

    #[error("profile has no shock front")]
    NoFront,

    #[error("grid error: {0}")]
    Grid(String),

    #[error("every grid point was excluded from the residual evaluation")]
    AllExcluded,

    #[error("spacing error: {0}")]
    Spacing(String),

    #[error("bracket endpoints classify identically ({0})")]
    SameClassification(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
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

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
