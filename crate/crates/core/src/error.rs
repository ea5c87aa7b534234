use thiserror::Error;

use crate::vec3::Vec3;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(&'static str),

    #[error("invalid constants: {0}")]
    InvalidConstants(String),

    #[error("evaluation point {point:?} lies within {cutoff:e} m of a source at {source_pos:?}")]
    SingularPoint {
        point: Vec3,
        source_pos: Vec3,
        cutoff: f64,
    },

    #[error("speed {speed:e} m/s is not below the speed of light {c:e} m/s")]
    Superluminal { speed: f64, c: f64 },

    #[error("charge cloud support is empty")]
    EmptySupport,

    #[error("charges coincide: the two positions are equal")]
    CoincidentCharges,

    #[error("time step violates the stability guard: c*dt/h = {courant:.4} > {limit}")]
    Cfl { courant: f64, limit: f64 },

    #[error("solution became non-finite at t = {t:e}")]
    Diverged { t: f64 },

    #[error("missing source data: {0}")]
    MissingSource(&'static str),

    #[error("invalid trajectory: {0}")]
    Trajectory(String),

    #[error("config error at `{path}`: {msg}")]
    Config { path: String, msg: String },

    #[error("malformed field dump: {0}")]
    Dump(String),

    #[error("analytic field self-check failed: {0}")]
    SelfCheck(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable snake_case tag for machine-readable error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidGrid(_) => "invalid_grid",
            Error::GridMismatch(_) => "grid_mismatch",
            Error::InvalidConstants(_) => "invalid_constants",
            Error::SingularPoint { .. } => "singular_point",
            Error::Superluminal { .. } => "superluminal",
            Error::EmptySupport => "empty_support",
            Error::CoincidentCharges => "coincident_charges",
            Error::Cfl { .. } => "cfl",
            Error::Diverged { .. } => "diverged",
            Error::MissingSource(_) => "missing_source",
            Error::Trajectory(_) => "trajectory",
            Error::Config { .. } => "config",
            Error::Dump(_) => "dump",
            Error::SelfCheck(_) => "self_check",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
