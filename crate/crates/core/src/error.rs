use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("range error: {0}")]
    Range(String),
    #[error("degenerate opening: alpha1 = {0} must lie in (0, 2π)")]
    DegenerateOpening(f64),
    #[error("pole endpoint: {0}")]
    PoleEndpoint(String),
    #[error("reference error: {0}")]
    Reference(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("configuration error: {0}")]
    Configuration(String),
    #[error("singularity: {0}")]
    Singularity(String),
    #[error("bracket error: {0}")]
    Bracket(String),
    #[error("accuracy error: estimate {estimate} with error {error} exceeds tolerance")]
    Accuracy { estimate: f64, error: f64 },
    #[error("divergent integral: {0}")]
    Divergent(String),
    #[error("solver error: relative gap {gap} after {iterations} iterations")]
    Solver { gap: f64, iterations: usize },
    #[error("resolution error: grid-refinement delta {delta} is at least 5%")]
    Resolution { delta: f64 },
    #[error("incomplete evidence: {0}")]
    IncompleteEvidence(String),
}

impl Error {
    /// Input-side failures (exit code 2 in the CLI). Everything else is a
    /// numerical failure (exit code 3).
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::Range(_)
                | Error::DegenerateOpening(_)
                | Error::PoleEndpoint(_)
                | Error::Reference(_)
                | Error::Validation(_)
                | Error::Configuration(_)
                | Error::Singularity(_)
                | Error::IncompleteEvidence(_)
        )
    }
}
