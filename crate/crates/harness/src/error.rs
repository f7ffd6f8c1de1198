use amfw_core::AmfwError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration: {0}")]
    Config(String),

    #[error("estimated memory {needed} bytes exceeds the cap of {cap} bytes")]
    MemoryCap { needed: u64, cap: u64 },

    #[error("solver: {0}")]
    Solver(#[from] AmfwError),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    /// Process exit code for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Io(_) => 2,
            HarnessError::MemoryCap { .. } => 3,
            HarnessError::Solver(_) => 4,
        }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
