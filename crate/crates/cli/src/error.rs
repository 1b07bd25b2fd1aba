use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] phonocat_core::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

/// Core errors that mean the numerics did not settle, as opposed to a point
/// being outside its regime or an impossible herald.
pub fn is_numerical_failure(e: &phonocat_core::Error) -> bool {
    use phonocat_core::Error::*;
    matches!(
        e,
        CutoffTooSmall { .. }
            | Truncation { .. }
            | Unstable { .. }
            | GridTooSmall { .. }
            | NonConvergence { .. }
            | Lyapunov(_)
            | NegativeNegativity(_)
    )
}
