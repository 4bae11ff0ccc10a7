use thiserror::Error;

pub type Result<T> = std::result::Result<T, LabError>;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("half-space grid passed where a whole-space grid is required (extension step skipped?)")]
    HalfspaceGrid,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("component count mismatch: expected {expected}, found {found}")]
    ComponentMismatch { expected: usize, found: usize },
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("dirichlet trace violation: max |u| on x_n = 0 is {trace:e}, tolerance {tol:e}")]
    DirichletTrace { trace: f64, tol: f64 },
    #[error("explicit scheme unstable: dt = {dt:e} exceeds limit {limit:e}")]
    Stability { dt: f64, limit: f64 },
    #[error("divergence detected: {0}")]
    Divergence(String),
    #[error("tolerance not met: estimated error {estimate:e} above {tol:e}")]
    Tolerance { estimate: f64, tol: f64 },
    #[error("coincident points: kernel is singular at the requested pair")]
    Coincident,
    #[error("cylinder exits the sampled region: {0}")]
    OutsideSample(String),
    #[error("boundary flag violated: {0}")]
    BoundaryFlag(String),
    #[error("stencil margin too small: {0}")]
    Margin(String),
    #[error("smallness condition violated: T = {t:e}, admissible T <= {admissible:e}")]
    Smallness { t: f64, admissible: f64 },
    #[error("contraction failure: {0}")]
    Contraction(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("solver failed to converge: {0}")]
    NoConvergence(String),
}

impl LabError {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        LabError::Io { path: path.into(), source }
    }
}
