use alloc::string::String;

/// Errors raised by state, operator, arrangement and detector construction.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("states or operators live on different bases")]
    BasisMismatch,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("basis must contain at least one label")]
    EmptyBasis,
    #[error("duplicate basis label `{0}`")]
    DuplicateLabel(String),
    #[error("unknown basis label or path `{0}`")]
    UnknownLabel(String),
    #[error("non-finite amplitude or matrix entry")]
    NonFinite,
    #[error("operator is not square")]
    NotSquare,
    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },
    #[error("cannot normalize the zero vector")]
    ZeroVector,
    #[error("component states are not orthogonal (|overlap| = {overlap})")]
    NotOrthogonal { overlap: f64 },
    #[error("coefficients are not normalized (|c1|^2 + |c2|^2 = {norm_sq})")]
    CoefficientsNotNormalized { norm_sq: f64 },
    #[error("operator is not hermitian (residual {residual})")]
    NotHermitian { residual: f64 },
    #[error("operator is not positive (min eigenvalue {min_eigenvalue})")]
    NotPositive { min_eigenvalue: f64 },
    #[error("effect spectrum exceeds one (max eigenvalue {max_eigenvalue})")]
    SpectrumAboveOne { max_eigenvalue: f64 },
    #[error("density operator trace is {trace}, expected 1")]
    TraceNotUnit { trace: f64 },
    #[error("expectation {value} lies outside [0, 1]; the effect is invalid")]
    ExpectationOutOfRange { value: f64 },
    #[error("expectation has imaginary residue {value}")]
    ImaginaryResidue { value: f64 },
    #[error("invalid path pair `{0}` / `{1}`")]
    InvalidPathPair(String, String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no amplitude survives the blocker")]
    ZeroSurvival,
    #[error("arrangement has no swept phase shifter")]
    NoSweptPhase,
    #[error("arrangement has more than one swept phase shifter")]
    AmbiguousSweptPhase,
    #[error("detector placement does not match layout: {0}")]
    LayoutMismatch(String),
    #[error("outcome family is incomplete (residual {residual})")]
    IncompleteFamily { residual: f64 },
    #[error("outcome family has no all-fired outcome")]
    MissingOutcome,
    #[error("outcome probabilities sum to {total}, expected 1")]
    DegenerateDistribution { total: f64 },
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error("invalid scenario parameters: {0}")]
    InvalidParams(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
