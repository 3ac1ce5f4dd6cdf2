use thiserror::Error;

/// Failure categories used to pick a process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Config,
    Data,
    Divergence,
}

impl Category {
    pub fn exit_code(self) -> i32 {
        match self {
            Category::Config => 2,
            Category::Data => 3,
            Category::Divergence => 4,
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("backward called before the graph was evaluated")]
    NotEvaluated,
    #[error("non-finite value encountered: {0}")]
    NonFiniteValue(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("degenerate input channel {channel}: standard deviation {sigma:e}")]
    DegenerateInput { channel: String, sigma: f64 },
    #[error("singular multibody system (|det| = {0:e})")]
    SingularSystem(f64),
    #[error("rollout diverged at step {step} (|omega| = {omega:e})")]
    NonFiniteState { step: usize, omega: f64 },
    #[error("window length {n} does not fit a trajectory of {len} samples")]
    WindowTooLong { n: usize, len: usize },
    #[error("non-finite gradient in minibatch {0}")]
    NonFiniteGradient(usize),
    #[error("trajectory {trajectory} diverged during simulation")]
    RolloutDiverged { trajectory: usize },
    #[error("feature `{0}` has zero sensitivity")]
    ZeroSensitivity(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn category(&self) -> Category {
        match self {
            Error::Config(_) => Category::Config,
            Error::Data(_) | Error::Io(_) | Error::Csv(_) | Error::DegenerateInput { .. } => {
                Category::Data
            }
            Error::WindowTooLong { .. } | Error::ShapeMismatch(_) => Category::Config,
            _ => Category::Divergence,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
