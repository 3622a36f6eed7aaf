use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value in {what}")]
    NonFinite { what: String },

    #[error(
        "conjugate symmetry broken: imaginary residue {residue:e} relative to field magnitude"
    )]
    BrokenSymmetry { residue: f64 },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("blow-up at t = {time}: {reason} (last valid state at t = {last_valid_time})")]
    BlowUp {
        time: f64,
        last_valid_time: f64,
        reason: String,
    },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("config: {0}")]
    Config(String),

    #[error("{0}")]
    Input(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
