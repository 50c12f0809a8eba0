use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain mismatch: [{0}, {1}] vs [{2}, {3}]")]
    DomainMismatch(f64, f64, f64, f64),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("ill-posed boundary conditions: det(Na + Nb W(b-a)) = {det:e}")]
    IllPosed { det: f64 },

    #[error("operator is not self-adjoint (kernel asymmetry {asymmetry:e})")]
    NotSelfAdjoint { asymmetry: f64 },

    #[error("compression of T is near-singular (condition estimate {cond:e})")]
    SingularMass { cond: f64 },

    #[error("integration failed at t = {t}: {reason}")]
    Integration { t: f64, reason: String },

    #[error("unsupported pairing: {0}")]
    UnsupportedPairing(String),

    #[error("expression error: {0}")]
    Expr(String),

    #[error("spec error: {0}")]
    Spec(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
