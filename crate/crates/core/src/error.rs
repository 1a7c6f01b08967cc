use thiserror::Error;

/// Errors raised by the numerical kernels and solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("argument {0} is within the pole guard of a gamma-function pole")]
    Pole(String),
    #[error("{what} did not converge after {iterations} iterations")]
    Convergence { what: &'static str, iterations: usize },
    #[error("floating-point overflow evaluating {0}")]
    Overflow(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("imaginary residue {residue:e} exceeds tolerance evaluating {what}")]
    ImaginaryResidue { what: &'static str, residue: f64 },
    #[error("grids carry different Jacobi parameters")]
    ParamMismatch,
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("degenerate mode: lambda^2 + rho^2 + m = 0 at lambda = {lambda}")]
    DegenerateMode { lambda: f64 },
    #[error("H-norm of {0} is not finite")]
    HNorm(&'static str),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for errors caused by bad input rather than numerical failure.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::ParamMismatch
                | Error::GridMismatch(_)
                | Error::Io(_)
                | Error::Parse(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
