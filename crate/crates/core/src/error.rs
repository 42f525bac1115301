use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("spectral parameter {lambda} coincides with threshold nu_{n}")]
    ThresholdCollision { lambda: Complex64, n: usize },

    #[error("elimination pivot {pivot:e} at row {row} is below the singularity cutoff")]
    NearSingular { row: usize, pivot: f64 },

    #[error("Newton iteration did not converge after {iterations} steps (last iterate {last})")]
    NoConvergence { iterations: usize, last: Complex64 },

    #[error("root kappa = {kappa} lies in the sector of sheet {found}, not of sheet {expected}")]
    SectorMismatch {
        kappa: Complex64,
        expected: String,
        found: String,
    },

    #[error("root {lambda} lies in the upper half-plane; it is not a point of the lower sheet")]
    UpperHalfPlane { lambda: Complex64 },

    #[error("{count} eigenvalues below the threshold; the bound-state routine expects exactly one")]
    MultiRoot { count: usize },

    #[error("no eigenvalue below the threshold")]
    NoRoot,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable snake-case name of the variant, for machine-readable reports.
    pub fn status(&self) -> &'static str {
        match self {
            Error::ThresholdCollision { .. } => "threshold_collision",
            Error::NearSingular { .. } => "near_singular",
            Error::NoConvergence { .. } => "no_convergence",
            Error::SectorMismatch { .. } => "sector_mismatch",
            Error::UpperHalfPlane { .. } => "upper_half_plane",
            Error::MultiRoot { .. } => "multi_root",
            Error::NoRoot => "no_root",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::Parse(_) => "parse_error",
        }
    }

    /// Whether the error is a property of the input rather than of the numerics.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::InvalidParameter(_) | Error::Parse(_))
    }
}
