use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("operator is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("operator is not unitary (max deviation of U†U from identity {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("trace has imaginary residue {residue:e}")]
    ImaginaryResidue { residue: f64 },

    #[error("invalid density state: {0}")]
    InvalidState(String),

    #[error("invalid work distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite amplitudes after step at t = {time}")]
    NonFinite { time: f64 },

    #[error("grid under-resolves the requested states: {0}")]
    UnderResolved(String),

    #[error("all grid points are below the node threshold")]
    AllMasked,

    #[error("trajectory {traj_id} left the trusted interior at t = {time} (x = {position})")]
    TrajectoryEscaped {
        traj_id: usize,
        time: f64,
        position: f64,
    },

    #[error("trajectory {traj_id}: {masked} of {total} samples used node-guarded fields")]
    UnreliableIntegral {
        traj_id: usize,
        masked: usize,
        total: usize,
    },

    #[error("trajectory {traj_id}: work endpoint lies in a node-masked region")]
    MaskedEndpoint { traj_id: usize },

    #[error("Gibbs truncation at n_max = {n_max} discards weight {tail:e}")]
    Truncation { n_max: usize, tail: f64 },

    #[error("weights do not match records: {0}")]
    WeightMismatch(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
