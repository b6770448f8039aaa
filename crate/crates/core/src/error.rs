use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter is outside its admissible domain.
    InvalidParameter(String),
    /// Two grids that must be aligned have different lengths.
    GridMismatch { expected: usize, found: usize },
    /// Number of assets, weights or coordinates disagree.
    DimensionMismatch { expected: usize, found: usize },
    /// A linear constraint system has no solution.
    Infeasible(String),
    /// Root search found no sign change inside the bracket.
    NoRoot { lo: f64, hi: f64 },
    /// A quadratic has no real roots.
    NegativeDiscriminant(f64),
    /// The PDE is not well posed for these coefficients.
    IllPosed(String),
    /// A matrix that must be invertible is singular.
    Singular(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::GridMismatch { expected, found } => {
                write!(f, "grid mismatch: expected {expected} points, found {found}")
            }
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::Infeasible(msg) => write!(f, "infeasible: {msg}"),
            Error::NoRoot { lo, hi } => write!(f, "no root in bracket [{lo}, {hi}]"),
            Error::NegativeDiscriminant(d) => write!(f, "negative discriminant {d}"),
            Error::IllPosed(msg) => write!(f, "ill-posed problem: {msg}"),
            Error::Singular(msg) => write!(f, "singular: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
