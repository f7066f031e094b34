use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid tour: {0}")]
    InvalidTour(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("lp solver: {0}")]
    Solver(String),

    /// The cutting-plane loop hit its round cap with cuts still violated.
    #[error(
        "separation did not converge after {rounds} rounds \
         (last value {value}, worst remaining violation {violation})"
    )]
    SeparationCap {
        rounds: usize,
        value: f64,
        violation: f64,
    },

    /// A theorem-backed runtime certificate failed. This always indicates an
    /// implementation bug, never an acceptable outcome.
    #[error("certification failed: {name}: lhs {lhs} exceeds rhs {rhs} beyond tolerance {tol}")]
    Certification {
        name: &'static str,
        lhs: f64,
        rhs: f64,
        tol: f64,
    },
}
