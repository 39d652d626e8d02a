use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {}", .0.join("; "))]
    InvalidParams(Vec<String>),

    #[error("vacuum cell {cell} (species {species})")]
    VacuumCell { cell: usize, species: usize },

    #[error("CFL violation: dt = {dt:e} exceeds limit {limit:e}")]
    Cfl { dt: f64, limit: f64 },

    #[error("unsupported scaling regime (Ma = {ma}, Kn = {kn})")]
    UnsupportedRegime { ma: f64, kn: f64 },

    #[error("non-positive {field} at cell {cell} (species {species})")]
    NonPositive {
        field: &'static str,
        cell: usize,
        species: usize,
    },

    #[error("velocity domain too small: outflow {outflow:e} (species {species})")]
    VelocityDomain { outflow: f64, species: usize },

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("internal defect: {0}")]
    Defect(String),

    #[error("dimension mismatch: {0}")]
    ShapeMismatch(String),

    #[error("need ≥3 points, got {0}")]
    NeedPoints(usize),

    #[error("non-positive entry in {0}")]
    NonPositiveEntry(&'static str),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

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
        Error::Io(e.to_string())
    }
}
