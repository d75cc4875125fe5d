use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A coin matrix violates one of the unitarity relations.
    #[error("invalid coin: relation `{relation}` violated (residual {residual:e})")]
    InvalidCoin { relation: &'static str, residual: f64 },

    /// |a| = 0: the walk is a deterministic mover and has no band structure.
    #[error("degenerate coin: {0}")]
    DegenerateCoin(String),

    /// A coin field was queried outside the sites or steps it defines.
    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("window too small: {message} (required half-width {required})")]
    Window { required: i64, message: String },

    #[error("density is singular at the band edge x = {x}")]
    SingularEndpoint { x: f64 },

    #[error("quadrature did not converge: achieved error estimate {achieved:e}, wanted {wanted:e}")]
    Quadrature { achieved: f64, wanted: f64 },

    #[error("norm drift {drift:e} exceeds tolerance; reduce the time step")]
    StepSize { drift: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("sweep failed at t = {t}: {source}")]
    Sweep {
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for errors caused by the caller's inputs rather than by a numerical failure.
    pub fn is_config(&self) -> bool {
        match self {
            Error::InvalidArgument(_)
            | Error::InvalidCoin { .. }
            | Error::Configuration(_)
            | Error::Precondition(_)
            | Error::Io(_)
            | Error::Json(_) => true,
            Error::Sweep { source, .. } => source.is_config(),
            _ => false,
        }
    }
}
