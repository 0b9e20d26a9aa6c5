use thiserror::Error;

pub type Result<T> = std::result::Result<T, TomographyError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TomographyError {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: String,
        found: String,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("not a density matrix: {0}")]
    InvalidState(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("time {0} is negative")]
    NegativeTime(f64),

    #[error("time {t} lies outside the tabulated range [{start}, {end}]")]
    TimeOutOfRange { t: f64, start: f64, end: f64 },

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("decomposition failed at t = {time}: residual {residual:e} exceeds {tolerance:e}")]
    DecompositionFailure {
        time: f64,
        residual: f64,
        tolerance: f64,
    },

    #[error("lambda matrix not solvable ({0}); the projections need p = mu and a nonzero determinant, or full column rank for least squares")]
    Solvability(String),

    #[error("frame is incomplete: span dimension {span_dimension}, deficit {deficit}")]
    Incomplete { span_dimension: usize, deficit: usize },

    #[error("degenerate signals: {0}")]
    DegenerateSignals(String),

    #[error("division-degenerate closed form: {0}")]
    DivisionDegenerate(String),

    #[error("eigendecomposition failed: {0}")]
    EigenFailure(String),

    #[error("record I/O: {0}")]
    Record(String),
}

impl TomographyError {
    pub(crate) fn shape(context: &'static str, expected: (usize, usize), found: (usize, usize)) -> Self {
        TomographyError::DimensionMismatch {
            context,
            expected: format!("{}x{}", expected.0, expected.1),
            found: format!("{}x{}", found.0, found.1),
        }
    }
}
