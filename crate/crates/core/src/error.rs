use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("schema error: {0}")]
    Schema(String),

    #[error("continuity error at row {row}: {message}")]
    Continuity { row: usize, message: String },

    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("insufficient data: need at least {needed} rows, have {available}")]
    InsufficientData { needed: usize, available: usize },

    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("gram matrix is not invertible yet ({absorbed} examples absorbed, dimension {dim})")]
    NotInvertible { absorbed: usize, dim: usize },

    #[error("prediction set undefined at step {step}: significance {eps} is outside [2/n, 1] with n = {n}")]
    Undefined { step: usize, eps: f64, n: usize },

    #[error("need at least {needed} examples, have {available}")]
    TooFewExamples { needed: usize, available: usize },

    #[error("prediction for origin {origin} arrived after origin {latest}")]
    OutOfOrder { origin: usize, latest: usize },

    #[error("no pending prediction for origin {0}")]
    MissingOrigin(usize),

    #[error("config error: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 config, 3 data, 4 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Schema(_)
            | Error::Continuity { .. }
            | Error::Parse { .. }
            | Error::InsufficientData { .. }
            | Error::Io(_)
            | Error::Csv(_) => 3,
            Error::Dimension { .. }
            | Error::NotInvertible { .. }
            | Error::Undefined { .. }
            | Error::TooFewExamples { .. }
            | Error::OutOfOrder { .. }
            | Error::MissingOrigin(_)
            | Error::Numerical(_) => 4,
        }
    }
}
