use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A state or channel lost more probability to the Fock cutoff than allowed.
    #[error("truncation error: lost mass {lost:.3e} exceeds {limit:.1e} (raise the cutoff)")]
    Truncation { lost: f64, limit: f64 },

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("invalid subsystem index {index} for {count} subsystems")]
    Subsystem { index: usize, count: usize },

    #[error("tomogram slice not normalized: integral {integral:.6} (tolerance {tol:.1e})")]
    Normalization { integral: f64, tol: f64 },

    /// Moment inversion needs the angles m*pi/(k+l+1); the grid does not carry them.
    #[error("missing quorum angle {0:.6} in tomogram grid")]
    Quorum(f64),

    #[error("quantifier undefined: {0}")]
    Undefined(String),

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("negative indicator value {0:.3e}")]
    NegativeIndicator(f64),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
