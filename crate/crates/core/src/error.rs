use std::fmt;

/// Errors reported by the library.
///
/// Numerical routines stay infallible on their hot paths; fallible entry
/// points validate inputs up front and return one of these.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter failed its domain check (e.g. `sigma <= 1`, `p` outside (0,1)).
    InvalidParameter(String),
    /// A matrix operation received non-finite entries.
    NonFiniteMatrix,
    /// Inversion of a matrix whose determinant is below the singularity floor.
    SingularMatrix { det: f64 },
    /// Two words were expected to share an index window and do not.
    WindowMismatch {
        expected: (i64, i64),
        got: (i64, i64),
    },
    /// Distance between equal words is undefined (it would be 2^-inf).
    EqualWords,
    /// A symbol segment does not cover the index range an iteration needs.
    InsufficientContext {
        needs: (i64, i64),
        got: (i64, i64),
    },
    /// An exact enumeration would exceed its size cap. `fallback` names the
    /// cheaper alternative, if one exists.
    Capacity {
        required: u128,
        cap: u128,
        fallback: Option<&'static str>,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::NonFiniteMatrix => write!(f, "matrix has non-finite entries"),
            Error::SingularMatrix { det } => {
                write!(f, "matrix is numerically singular (det = {det:e})")
            }
            Error::WindowMismatch { expected, got } => write!(
                f,
                "words must share the window [{}, {}], got [{}, {}]",
                expected.0, expected.1, got.0, got.1
            ),
            Error::EqualWords => write!(f, "distance between equal words is undefined"),
            Error::InsufficientContext { needs, got } => write!(
                f,
                "segment covers [{}, {}] but the iteration needs [{}, {}]",
                got.0, got.1, needs.0, needs.1
            ),
            Error::Capacity {
                required,
                cap,
                fallback,
            } => {
                write!(f, "exact enumeration needs {required} items, cap is {cap}")?;
                if let Some(alt) = fallback {
                    write!(f, " (use {alt} instead)")?;
                }
                Ok(())
            }
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
