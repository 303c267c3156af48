use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate polynomial")]
    DegeneratePolynomial,
    #[error("improper system")]
    ImproperSystem,
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("unstable Lyapunov: A is not Hurwitz")]
    UnstableLyapunov,
    #[error("unbounded on axis")]
    UnboundedOnAxis,
    #[error("boundary spectral zero")]
    BoundarySpectralZero,
    #[error("no pointwise maximizer semantics: pair fails the winding condition")]
    NoPointwiseMaximizer,
    #[error("graph-direction singular")]
    GraphDirectionSingular,
    #[error("interpolation failed: residual {0:.3e}")]
    InterpolationFailed(f64),
    #[error("degenerate image")]
    DegenerateImage,
    #[error("target outside construction range: beta {beta:.6} >= b_max {b_max:.6}")]
    TargetOutOfRange { beta: f64, b_max: f64 },
    #[error("Riccati solve failed: {0}")]
    Riccati(String),
    #[error("synthesis defect: margin {achieved:.6} below required {required:.6}")]
    SynthesisDefect { achieved: f64, required: f64 },
    #[error("ill-posed feedback loop")]
    IllPosedLoop,
    #[error("singular matrix")]
    SingularMatrix,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("I/O error on {path}: {message}")]
    Io { path: String, message: String },
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }
}
