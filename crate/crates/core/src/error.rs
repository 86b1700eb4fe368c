use thiserror::Error;

/// Errors raised by the library.
///
/// `NotFactorizable` is an expected outcome at the incompleteness locus of a
/// double, not a fault.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("rank-deficient input: rank {rank} of {count} vectors")]
    RankDeficient { rank: usize, count: usize },

    #[error("double element is not factorizable (margin {margin:e})")]
    NotFactorizable { margin: f64 },

    #[error("{what} violates its membership invariant (residual {residual:e})")]
    Membership { what: &'static str, residual: f64 },

    #[error("elements are not composable (mismatch {residual:e})")]
    NotComposable { residual: f64 },

    #[error("anchor mismatch in groupoid action (residual {residual:e})")]
    AnchorMismatch { residual: f64 },

    #[error("frame mismatch: expected {expected}, found {found}")]
    FrameMismatch { expected: String, found: String },

    #[error("point is not on the unit level set of J_H (residual {residual:e})")]
    LevelSet { residual: f64 },

    #[error("{what}: residual {residual:e} exceeds tolerance")]
    Residual { what: &'static str, residual: f64 },

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
