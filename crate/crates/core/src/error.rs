use std::fmt;

/// Errors produced while building or evaluating models and simulations.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid source parameters: {0}")]
    InvalidParams(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("state {0} is not a member of the state space")]
    NotInSpace(String),

    #[error("{context}: residual {residual:.3e} exceeds tolerance {tolerance:.1e}")]
    Numerical {
        context: &'static str,
        residual: f64,
        tolerance: f64,
    },

    #[error("linear solve failed: {0}")]
    Solver(String),

    #[error("model construction: {0}")]
    Construction(String),

    #[error("model validation failed: {}", Violations(.0))]
    Validation(Vec<crate::mfq::Violation>),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

struct Violations<'a>(&'a [crate::mfq::Violation]);

impl fmt::Display for Violations<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}
