use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse failure classes, used by the command line front end to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Precondition,
    Numerical,
    Io,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Config => 2,
            ErrorClass::Precondition => 3,
            ErrorClass::Numerical => 4,
            ErrorClass::Io => 1,
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("point lies at (or numerically on) the north pole, u4 = {u4}")]
    NorthPole { u4: f64 },

    #[error("Kepler flow is undefined at the collision instant t = {t}")]
    CollisionInstant { t: f64 },

    #[error("frame does not generate a collision orbit (re4^2 + im4^2 = {0})")]
    NotCollisionOrbit(f64),

    #[error("{what} did not converge (achieved error estimate {estimate:e})")]
    NonConvergence { what: &'static str, estimate: f64 },

    #[error("grid captures only {captured:.8} of the unit mass")]
    InsufficientCoverage { captured: f64 },

    #[error("grid resolution: {0}")]
    Resolution(String),

    #[error("states do not share the same semiclassical scale")]
    ScaleMismatch,

    #[error("too close to a branch point of the logarithm: |alpha . omega| = {0:e}")]
    BranchPoint(f64),

    #[error("Monte Carlo standard error {achieved:e} exceeds the requested {requested:e}")]
    MonteCarloTolerance { achieved: f64, requested: f64 },

    #[error("symbol {0}")]
    Symbol(String),

    #[error("frames generate the same oriented geodesic")]
    SameGeodesic,

    #[error("matrix is numerically singular (|det| = {0:e})")]
    IllConditioned(f64),

    #[error("configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Config(_) | Error::Json(_) => ErrorClass::Config,
            Error::NonConvergence { .. }
            | Error::MonteCarloTolerance { .. }
            | Error::IllConditioned(_)
            | Error::InsufficientCoverage { .. } => ErrorClass::Numerical,
            Error::Io(_) | Error::Csv(_) => ErrorClass::Io,
            _ => ErrorClass::Precondition,
        }
    }
}
