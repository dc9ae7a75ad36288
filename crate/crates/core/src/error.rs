use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("evaluation failed at x = {x}: {source}")]
    Evaluation { x: f64, source: Box<Error> },

    #[error(
        "infeasible budgets: device {device} admits at most {latency_bound:.3} samples under \
         the latency budget and {energy_bound:.3} under the energy budget (binding: {binding})"
    )]
    Infeasible {
        device: usize,
        latency_bound: f64,
        energy_bound: f64,
        binding: &'static str,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Infeasible budgets and rejected hyperparameters, as opposed to
    /// usage or I/O failures.
    pub fn is_infeasible_or_invalid(&self) -> bool {
        matches!(
            self,
            Error::Infeasible { .. } | Error::InvalidParameter(_) | Error::Domain(_)
        )
    }
}
