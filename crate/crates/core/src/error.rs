use thiserror::Error;

pub type Result<T, E = AmfwError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum AmfwError {
    #[error("grid sizing: {0}")]
    Sizing(String),

    #[error("index {index:?} out of range for grid with extents {extents:?}")]
    IndexOutOfRange {
        index: Vec<usize>,
        extents: Vec<usize>,
    },

    #[error("invalid direction {dir} for a {dim}-dimensional grid")]
    InvalidDirection { dir: usize, dim: usize },

    #[error("invalid split term {term} (system has {terms} terms)")]
    InvalidTerm { term: usize, terms: usize },

    #[error("face data required on an interior-only grid")]
    MissingFaceData,

    #[error("mode mismatch: {0}")]
    ModeMismatch(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("singular matrix: pivot breakdown at row {row}")]
    Singular { row: usize },

    #[error("singular line solve in direction {dir}, line starting at point {line_start}, row {row}")]
    SingularLine {
        dir: usize,
        line_start: usize,
        row: usize,
    },

    #[error("stage {stage}, split term {term}: {source}")]
    StageSolve {
        stage: usize,
        term: usize,
        #[source]
        source: Box<AmfwError>,
    },

    #[error("integration aborted at step {step}: {source}")]
    StepFailure {
        step: usize,
        #[source]
        source: Box<AmfwError>,
    },

    #[error("final time {t_end} is not a whole number of steps of size {dt}")]
    NonIntegralSteps { t_end: f64, dt: f64 },

    #[error("invalid tableau: {0}")]
    InvalidTableau(String),

    #[error("no edge polynomials of degree <= 3 for boundary operator (p0={p0}, q0={q0}, p1={p1}, q1={q1})")]
    EdgePolynomial { p0: f64, q0: f64, p1: f64, q1: f64 },

    #[error("inadmissible boundary operator: |p| + |q| must be positive (direction {dir}, end {end})")]
    InadmissibleBoundary { dir: usize, end: usize },

    #[error("unsupported boundary condition: {0}")]
    UnsupportedBoundary(String),

    #[error("problem has no exact solution")]
    MissingExactSolution,

    #[error("order estimate needs positive finite errors, got {coarse} and {fine}")]
    NonPositiveError { coarse: f64, fine: f64 },

    #[error("dense system too large for the reference stepper: {0} > 4096")]
    TooLarge(usize),
}
