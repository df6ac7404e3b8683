use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("atom index {atom} out of range for a {len}-atom register")]
    AtomOutOfRange { atom: usize, len: usize },

    #[error("atom {atom} has no level {level}")]
    MissingLevel { atom: usize, level: &'static str },

    #[error("invalid register: {0}")]
    Register(String),

    #[error("singular parameters: {factor} vanishes")]
    Singular { factor: &'static str },

    #[error("no solution: {reason} (best residual {best_residual:.3e})")]
    NoSolution { reason: String, best_residual: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("noise path too short: needs {needed} samples, has {available}")]
    PathTooShort { needed: usize, available: usize },

    #[error("degenerate noise path: {0}")]
    DegeneratePath(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("malformed csv: {0}")]
    Csv(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}
