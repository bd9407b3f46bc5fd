use thiserror::Error;

/// Errors raised by the channel, optics and estimation layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("{name} = {value} is outside [{lo}, {hi}]")]
    Range { name: &'static str, value: f64, lo: f64, hi: f64 },

    #[error("constraint violated: {0}")]
    Constraint(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("input contract violated: {0}")]
    InputContract(String),

    #[error("fit is degenerate: expected 3 peaks, found {found}")]
    FitDegeneracy { found: usize },

    #[error("fit did not converge after {iterations} iterations (residual rms {residual:.3e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("partial result: missing fits for pairs {missing:?}")]
    PartialResult { missing: Vec<(usize, usize)> },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_range(name: &'static str, value: f64, lo: f64, hi: f64) -> Result<()> {
    if value.is_finite() && value >= lo && value <= hi {
        Ok(())
    } else {
        Err(Error::Range { name, value, lo, hi })
    }
}
