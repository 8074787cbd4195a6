use thiserror::Error;

/// Crate-wide error. Every variant names the module it came from so that
/// diagnostics printed by the command-line driver say where a failure started.
#[derive(Debug, Error)]
pub enum Error {
    #[error("geometry: {0}")]
    Geometry(#[from] GeometryError),
    #[error("scenarios: {0}")]
    Scenario(ScenarioError),
    #[error("solver: {0}")]
    Solver(SolverError),
    #[error("normalization: {0}")]
    Normalization(#[from] NormalizationError),
    #[error("analysis: {0}")]
    Analysis(#[from] AnalysisError),
    #[error("cli_io: {0}")]
    Io(#[from] IoError),
}

// Geometry failures passed up through another module keep the geometry tag.
impl From<ScenarioError> for Error {
    fn from(e: ScenarioError) -> Self {
        match e {
            ScenarioError::Geometry(g) => Error::Geometry(g),
            other => Error::Scenario(other),
        }
    }
}

impl From<SolverError> for Error {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::Geometry(g) => Error::Geometry(g),
            other => Error::Solver(other),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("rho must be positive and finite, got {0}")]
    BadRho(f64),
    #[error("grid needs at least 16 cells, got {0}")]
    GridTooSmall(usize),
    #[error("grid cell count must be even so the middle parallel is a node, got {0}")]
    OddGrid(usize),
    #[error("profile is not positive at node {index} (sigma = {sigma}, f0 = {value})")]
    NonPositiveProfile { index: usize, sigma: f64, value: f64 },
    #[error("field has {got} values but the grid has {expected} nodes")]
    LengthMismatch { expected: usize, got: usize },
    #[error("conformal exponent is not finite at node {0}")]
    NonFinite(usize),
    #[error("invalid profile parameter: {0}")]
    BadProfile(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("cos_band needs a*rho < pi/2 for a positive profile (a = {a}, rho = {rho})")]
    ProfileNotPositive { a: f64, rho: f64 },
    #[error("perturbation amplitude must be finite and non-negative, got {0}")]
    BadEpsilon(f64),
    #[error("perturbation mode must be at least 1")]
    BadMode,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("invalid stepper configuration: {0}")]
    BadConfig(String),
    #[error(
        "explicit time step collapsed to {dt:e} (< dt_min {dt_min:e}) at t_tilde = {t_tilde}; \
         use scheme = implicit_euler for this horizon"
    )]
    StepCollapse { dt: f64, dt_min: f64, t_tilde: f64 },
    #[error("implicit time step shrank to {dt:e} (< dt_min {dt_min:e}) at t_tilde = {t_tilde}")]
    ImplicitStepCollapse { dt: f64, dt_min: f64, t_tilde: f64 },
    #[error("newton iteration did not converge ({iterations} iterations, last update {last_update:e})")]
    NewtonDiverged { iterations: usize, last_update: f64 },
    #[error("implicit step rejected {rejections} times in a row at t_tilde = {t_tilde} (last dt {dt:e})")]
    TooManyRejections { rejections: usize, t_tilde: f64, dt: f64 },
    #[error(
        "step budget of {max_steps} exhausted at t_tilde = {t_tilde} (area {area:e}) before the stop rule fired"
    )]
    StepBudget { max_steps: u64, t_tilde: f64, area: f64 },
    #[error("state became non-finite at t_tilde = {t_tilde}")]
    NonFinite { t_tilde: f64 },
    #[error("record_every must be positive")]
    BadRecordEvery,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NormalizationError {
    #[error("malformed trace: {0}")]
    MalformedTrace(String),
    #[error("target area must be positive, got {0}")]
    BadTargetArea(f64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("fit window needs at least {min} records, got {got}")]
    WindowTooShort { min: usize, got: usize },
    #[error("non-positive value {value} at index {index} in a log-transformed fit")]
    NonPositive { index: usize, value: f64 },
    #[error("boundary average curvature is undefined when the boundary is totally geodesic")]
    GeodesicBoundary,
    #[error("series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("line {line}: unknown key \"{key}\"")]
    UnknownKey { line: usize, key: String },
    #[error("missing required key \"{0}\"")]
    MissingKey(&'static str),
    #[error("line {line}: expected `key = value`, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("line {line}: bad value for \"{key}\": {reason}")]
    BadValue { line: usize, key: String, reason: String },
    #[error("trace csv format mismatch (expected schema v1 header): {0}")]
    Header(String),
    #[error("trace csv row {row}: {reason}")]
    Row { row: usize, reason: String },
    #[error("traces are not aligned record-for-record ({0} vs {1})")]
    Misaligned(usize, usize),
    #[error(transparent)]
    File(#[from] std::io::Error),
}
