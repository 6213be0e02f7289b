use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two inputs live in ambient spaces of different dimension.
    DimensionMismatch { expected: usize, found: usize },
    EmptyPointSet,
    /// A vertex assignment does not carry some simplex onto a simplex of the target.
    NotSimplicial { simplex: Vec<usize> },
    /// A simplicial map collapses the given simplex.
    Degenerate { simplex: Vec<usize> },
    /// A barycenter rule returned a point outside the open simplex.
    BarycenterNotInterior { simplex: Vec<usize> },
    UnknownSimplex { simplex: Vec<usize> },
    InvalidComplex(String),
    NonPositiveMesh,
    /// The point does not lie in the realised complex.
    OutsideComplex,
    /// `f x g` identifies two points of a sampled double-point pair.
    NotEmbedded { x: Vec<f64>, y: Vec<f64> },
    RetryBudgetExhausted { attempts: usize, tightest_pair: (usize, usize) },
    /// A piecewise-linear table does not match the complex it is evaluated on.
    NotLinearOnComplex,
    OutOfRange(String),
    /// Algebraic consistency of a double point failed.
    NotADoublePoint,
    RootFinding(String),
    Inconsistent(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::EmptyPointSet => write!(f, "empty point set"),
            Error::NotSimplicial { simplex } => {
                write!(f, "vertex map is not simplicial on {simplex:?}")
            }
            Error::Degenerate { simplex } => write!(f, "map collapses simplex {simplex:?}"),
            Error::BarycenterNotInterior { simplex } => {
                write!(f, "chosen barycenter is not interior to {simplex:?}")
            }
            Error::UnknownSimplex { simplex } => write!(f, "{simplex:?} is not a simplex"),
            Error::InvalidComplex(msg) => write!(f, "invalid complex: {msg}"),
            Error::NonPositiveMesh => write!(f, "mesh must be positive"),
            Error::OutsideComplex => write!(f, "point lies outside the complex"),
            Error::NotEmbedded { x, y } => {
                write!(f, "not an embedded lift at pair ({x:?}, {y:?})")
            }
            Error::RetryBudgetExhausted { attempts, tightest_pair } => write!(
                f,
                "retry budget exhausted after {attempts} attempts; tightest failing pair {tightest_pair:?}"
            ),
            Error::NotLinearOnComplex => write!(f, "table is not linear on the given complex"),
            Error::OutOfRange(msg) => write!(f, "argument out of range: {msg}"),
            Error::NotADoublePoint => write!(f, "payload is not a double point"),
            Error::RootFinding(msg) => write!(f, "root finding failed: {msg}"),
            Error::Inconsistent(msg) => write!(f, "inconsistent input: {msg}"),
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
