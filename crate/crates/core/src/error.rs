use thiserror::Error;

/// Errors produced by the sampling library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} sites, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("site {site} out of range for a {n}-site system")]
    SiteOutOfRange { site: usize, n: usize },

    #[error("site {site} appears more than once in a term")]
    DuplicateSite { site: usize },

    #[error("term {index}: coefficient {coeff} outside [-1, 1]")]
    CoefficientOutOfRange { index: usize, coeff: f64 },

    #[error("term {index}: support size {size} exceeds locality {locality}")]
    LocalityExceeded {
        index: usize,
        size: usize,
        locality: usize,
    },

    #[error("term {index}: Pauli string must be Hermitian with positive sign")]
    NonHermitianTerm { index: usize },

    #[error("declared degree {declared} does not match computed degree {computed}")]
    DegreeMismatch { declared: usize, computed: usize },

    #[error("term index {index} out of range ({m} terms)")]
    TermOutOfRange { index: usize, m: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("beta = {beta} exceeds the {mode} threshold {threshold}")]
    BetaAboveThreshold {
        beta: f64,
        threshold: f64,
        mode: &'static str,
    },

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("cluster budget exhausted after truncation order {achieved_k}")]
    ClusterBudget { achieved_k: usize },

    #[error("coefficient overflow at degree {degree}")]
    Overflow { degree: usize },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
