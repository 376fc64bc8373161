use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    InvalidDimension(usize),
    InvalidBond,
    InvalidCluster(&'static str),
    InvalidOrder {
        order: usize,
        min: usize,
    },
    OrderMismatch {
        diagram: usize,
        term: usize,
    },
    /// Requested perturbative order exceeds the configured kernel capacity.
    Capacity {
        order: usize,
        max: usize,
    },
    /// The Mott state is degenerate or the filling factor is invalid.
    InvalidState(String),
    SeriesLength {
        left: usize,
        right: usize,
    },
    SingularSeries,
    NoRoot,
    UnstablePotential {
        a6: f64,
    },
    InsufficientData {
        needed: usize,
        got: usize,
    },
    NonPositiveDensity {
        t: f64,
        value: f64,
    },
    IllConditioned(String),
    Budget {
        dimension: usize,
        budget: usize,
    },
    NoConvergence {
        iterations: usize,
        residual: f64,
    },
    Parse {
        line: usize,
        message: String,
    },
    InvalidArgument(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidDimension(d) => write!(f, "invalid lattice dimension {d}"),
            Error::InvalidBond => f.write_str("sites are not nearest neighbours"),
            Error::InvalidCluster(why) => write!(f, "invalid cluster: {why}"),
            Error::InvalidOrder { order, min } => {
                write!(f, "invalid perturbative order {order} (minimum {min})")
            }
            Error::OrderMismatch { diagram, term } => {
                write!(f, "diagram order {diagram} does not match Kato term order {term}")
            }
            Error::Capacity { order, max } => {
                write!(f, "order {order} exceeds the configured maximum {max}")
            }
            Error::InvalidState(msg) => write!(f, "invalid Mott state: {msg}"),
            Error::SeriesLength { left, right } => {
                write!(f, "series truncation orders differ ({left} vs {right})")
            }
            Error::SingularSeries => f.write_str("series has a vanishing constant term"),
            Error::NoRoot => f.write_str("no sign change in the search interval"),
            Error::UnstablePotential { a6 } => {
                write!(f, "sixth-order coefficient a6 = {a6} is not positive")
            }
            Error::InsufficientData { needed, got } => {
                write!(f, "need at least {needed} data points, got {got}")
            }
            Error::NonPositiveDensity { t, value } => {
                write!(f, "density {value} is not positive at t = {t}")
            }
            Error::IllConditioned(msg) => write!(f, "ill-conditioned fit: {msg}"),
            Error::Budget { dimension, budget } => {
                write!(f, "Hilbert-space dimension {dimension} exceeds budget {budget}")
            }
            Error::NoConvergence { iterations, residual } => {
                write!(f, "eigensolver did not converge after {iterations} iterations (residual {residual:e})")
            }
            Error::Parse { line, message } => write!(f, "parse error at line {line}: {message}"),
            Error::InvalidArgument(msg) => f.write_str(msg),
        }
    }
}

impl core::error::Error for Error {}
