use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("vector is not normalized (squared norm {0})")]
    NotNormalized(f64),

    #[error("zero vector cannot be normalized")]
    ZeroVector,

    #[error("operator is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("trace is not 1 (got {0})")]
    InvalidTrace(f64),

    #[error("operator is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("basis vectors are not orthonormal (max Gram deviation {0:e})")]
    NotOrthonormal(f64),

    #[error("duplicate outcome label {0:?}")]
    DuplicateLabel(String),

    #[error("unknown outcome label {0:?}")]
    UnknownLabel(String),

    #[error("outcome {label:?} is impossible (probability {probability:e})")]
    ImpossibleOutcome { label: String, probability: f64 },

    #[error("conditioning outcome {label:?} has vanishing probability {probability:e}")]
    ImpossibleCondition { label: String, probability: f64 },

    #[error("observables {0:?} and {1:?} commute; a counterfactual needs incompatible observables")]
    CommutingObservables(String, String),

    #[error("basis acts on factor {got:?}, expected {expected:?}")]
    WrongFactor {
        expected: crate::hilbert::Factor,
        got: crate::hilbert::Factor,
    },

    #[error("operation needs two-dimensional factors, got {0}")]
    NotTwoDimensional(usize),

    #[error("closed form disagrees with pipeline: {pipeline} vs {closed_form}")]
    ClosedFormMismatch { pipeline: f64, closed_form: f64 },

    #[error("events are not spacelike separated (interval {0})")]
    NotSpacelike(f64),

    #[error("boost speed {0} is not below light speed")]
    Superluminal(f64),

    #[error("non-finite coordinate")]
    NonFinite,

    #[error("Hardy parameters must lie strictly inside (0, pi/2): alpha={alpha}, beta={beta}")]
    DegenerateParams { alpha: f64, beta: f64 },

    #[error("invalid run configuration: {0}")]
    InvalidConfig(String),

    #[error("no runs produced the conditioning outcome {0:?}")]
    NoConditionEvents(String),
}

pub type Result<T> = std::result::Result<T, Error>;
