use thiserror::Error;

/// Errors raised by the certifiers and their numerical kernels.
///
/// A failed certification is not an error: certifiers report it through the
/// `verdict` of a [`crate::FrameCertificate`]. Errors are reserved for inputs
/// that violate a precondition.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid measure space: {0}")]
    InvalidMeasure(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix is not Hermitian (relative asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },

    #[error("matrix is indefinite: smallest eigenvalue {min:.3e} against largest {max:.3e}")]
    Indefinite { min: f64, max: f64 },

    #[error("matrix is not an orthogonal projector (residual {residual:.3e})")]
    NotProjector { residual: f64 },

    #[error("operator is the zero map")]
    ZeroOperator,

    #[error("precondition violated: {}", violated.join("; "))]
    PreconditionViolated { violated: Vec<String> },

    #[error("range is numerically ill-posed: singular value gap {ratio:.3e} below 10")]
    IllPosedRange { ratio: f64 },

    #[error("operator is not surjective: rank {rank} on a space of dimension {dim}")]
    NotSurjective { rank: usize, dim: usize },

    #[error("not a weak A-frame: factorization residual {residual:.3e}")]
    NotAWeakAFrame { residual: f64 },

    #[error("ladder has no sample dimensions")]
    EmptyLadder,

    #[error("ladder `{name}` is tagged unbounded but its norm does not grow at dim {dim}")]
    LadderNotGrowing { name: String, dim: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}
