use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {what} (expected {expected}, got {got})")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("singular KKT system: instance is not strongly-convex-strongly-concave")]
    SingularKkt,
    #[error("no feasible parameter regime: {0}")]
    Infeasible(String),
    #[error("consensus error {error:e} exceeds allowed neighbourhood {allowed:e}")]
    ConsensusPrecondition { error: f64, allowed: f64 },
    #[error("divergence at iteration {iteration}: Lyapunov value {psi:e} exceeds {limit:e}")]
    Divergence {
        iteration: usize,
        psi: f64,
        limit: f64,
    },
    #[error("consensus budget violated at iteration {iteration}: spread {spread:e} > {limit:e}")]
    BudgetViolated {
        iteration: usize,
        spread: f64,
        limit: f64,
    },
    #[error("schedule does not contract: worst window ratio {ratio}")]
    NoContraction { ratio: f64 },
    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension {
            what,
            expected,
            got,
        })
    }
}
