use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid value: {0}")]
    InvalidValue(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("shape mismatch: expected {expected} entries, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },

    #[error("degenerate kernel: {0}")]
    DegenerateKernel(String),

    #[error("time {t} is not representable: {reason}")]
    Unrepresentable { t: f64, reason: String },

    #[error("sup attained on the grid boundary at node {x_index}, argument {arg:?}; enlarge the momentum/velocity box")]
    BoundaryAttainment { x_index: usize, arg: [f64; 2] },

    #[error("empty sublevel {{H(x,.) <= {level}}} at node {x_index}")]
    EmptySublevel { x_index: usize, level: f64 },

    #[error("velocity {q:?} outside the tabulated box of half-width {half_width}")]
    Coverage { q: [f64; 2], half_width: f64 },

    #[error("midpoint convexity violated at x={x:?}, p={p:?}, p'={p2:?} by {excess:e}")]
    Convexity {
        x: [f64; 2],
        p: [f64; 2],
        p2: [f64; 2],
        excess: f64,
    },

    #[error("map {map} is not convex and increasing on [{lo}, {hi}]")]
    MapAudit { map: String, lo: f64, hi: f64 },

    #[error("hamiltonian is not x-independent")]
    NotXIndependent,

    #[error("level {a} is below the critical value {c}")]
    BelowCritical { a: f64, c: f64 },

    #[error("aubry set is empty at tolerance {0}; the tolerance is too small")]
    EmptyAubrySet(f64),

    #[error("internal inconsistency: {0}")]
    Inconsistent(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Errors caused by the user's input rather than a numerical precondition.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Io(_))
    }
}
