use thiserror::Error;

use crate::optimizer::SpsaRecord;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("register size {0} outside the supported range 1..={max}", max = crate::simcore::MAX_QUBITS)]
    Size(usize),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("channel is not trace preserving (|sum K^dag K - I| = {deviation:.3e})")]
    NotCptp { deviation: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("unphysical noise parameters: {0}")]
    Unphysical(String),

    #[error("window of {window_dt} dt cannot hold {sequence} (needs at least {required_dt} dt)")]
    InsufficientWindow {
        sequence: String,
        window_dt: u64,
        required_dt: u64,
    },

    #[error("invalid schedule: {0}")]
    Schedule(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("objective returned a non-finite value during {stage} step {iteration}")]
    NonFiniteObjective {
        stage: &'static str,
        iteration: usize,
        records: Vec<SpsaRecord>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
