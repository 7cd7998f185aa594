use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("non-finite input")]
    NonFiniteInput,

    #[error("orbit is singular at this point ({statistic} = {value:e})")]
    SingularOrbit { statistic: &'static str, value: f64 },

    #[error("coupling map has rank {rank}, expected orbit dimension {expected}")]
    RankDeficient { rank: usize, expected: usize },

    #[error("matrix is too far from the group to retract (smallest singular value {min_singular_value})")]
    NonRetractable { min_singular_value: f64 },

    #[error("matrix is not tangent to the group (antisymmetry defect {defect:e})")]
    NotTangent { defect: f64 },

    #[error("state left the finite range at step {step}")]
    NonFinite { step: usize },

    #[error("post-step map rejected step {step}: {reason}")]
    StepRejected { step: usize, reason: String },

    #[error("reference density does not integrate finitely: {0}")]
    QuadratureFailure(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("trajectory {index}: {source}")]
    Trajectory {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
