use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("malformed operator: {0}")]
    MalformedOperator(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not Hermitian (max entrywise deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("{name} = {value} is outside the domain: {reason}")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid fault path: {0}")]
    InvalidFaultPath(String),

    #[error("fault at leaf {leaf} has no phase assigned (child position {position})")]
    UnassignedPhase { leaf: usize, position: usize },

    #[error("recursion does not converge: {0}")]
    NoConvergence(String),

    #[error("singular integrand: {0}")]
    SingularIntegrand(String),

    #[error("malformed spectral table: {0}")]
    Table(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
