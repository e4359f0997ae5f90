use thiserror::Error;

/// Errors raised by the loop-space engine.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum GeomError {
    #[error("chart domain error: {0}")]
    ChartDomain(String),

    #[error("unsupported manifold for {op}: {manifold}")]
    UnsupportedManifold { op: &'static str, manifold: String },

    #[error("degenerate loop: length {length:e} below threshold")]
    DegenerateLoop { length: f64 },

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("field does not vanish at the basepoint (|U(0)| = {norm:e})")]
    NotBasedField { norm: f64 },

    #[error("operation requires a periodic loop, got a path")]
    PathVariant,

    #[error("operation requires an open path, got a periodic loop")]
    LoopVariant,

    #[error("basis too large: {size} fields for {samples} samples")]
    BasisTooLarge { size: usize, samples: usize },

    #[error("degenerate test case: reference value {reference:e} (omega = {omega:e})")]
    DegenerateTestCase { omega: f64, reference: f64 },

    #[error("loop not on level set: length {length} vs target {target} (tol {tolerance:e})")]
    NotOnLevelSet {
        length: f64,
        target: f64,
        tolerance: f64,
    },

    #[error("degenerate velocity: min speed {min_speed:e}")]
    DegenerateVelocity { min_speed: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for GeomError {
    fn from(e: std::io::Error) -> Self {
        GeomError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, GeomError>;
