use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("point lies outside the domain: {0}")]
    OutsideDomain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("root finding failed: {0}")]
    NoBracket(String),

    #[error("crossover not found: {0}")]
    NoCrossover(String),

    #[error("ellipsoid fit infeasible: {0}")]
    Infeasible(String),

    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("singular metric matrix at {0}")]
    SingularMetric(String),

    #[error("quadrature not resolved: {0}")]
    QuadratureResolution(String),
}

impl Error {
    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParams(_) | Error::OutsideDomain(_) => 3,
            Error::InvalidArgument(_) => 2,
            Error::Infeasible(_) | Error::InsufficientSamples { .. } => 4,
            Error::NoBracket(_)
            | Error::NoCrossover(_)
            | Error::SingularMetric(_)
            | Error::QuadratureResolution(_) => 4,
        }
    }
}
