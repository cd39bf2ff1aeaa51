use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("vector norm {norm:e} is too close to zero to normalize")]
    NearZeroVector { norm: f64 },

    #[error("mesh level {level} exceeds the cap of {max}")]
    LevelTooLarge { level: u32, max: u32 },

    #[error("mesh level {level} is too coarse for zero search (need at least {min})")]
    MeshTooCoarse { level: u32, min: u32 },

    #[error("polynomial degree {degree} exceeds the cap of {max}")]
    DegreeTooLarge { degree: u32, max: u32 },

    #[error("field component contains a monomial of even total degree {degree}")]
    NotOdd { degree: u32 },

    #[error("no candidate cells found; an odd field must vanish somewhere")]
    SuspectMiss,

    #[error("Newton iteration did not converge after {iterations} steps (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("tangent Jacobian is singular (det {det:e})")]
    SingularJacobian { det: f64 },

    #[error("zero set is not antipodally symmetric: |F(-p)| = {residual:e}")]
    AsymmetricZeroSet { residual: f64 },

    #[error("field vanishes on the winding circle (|F| = {value:e})")]
    ZeroOnCircle { value: f64 },

    #[error("winding circle needs more than {max_samples} samples")]
    StepTooLarge { max_samples: usize },

    #[error("value {0:?} is not a regular value of the field")]
    NotRegular([f64; 2]),

    #[error("invalid regular value: {0}")]
    InvalidRegularValue(String),

    #[error("degeneracy measure does not cross the threshold in [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("invalid parameter grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
