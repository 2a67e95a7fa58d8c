use thiserror::Error;

/// Errors surfaced by the CLI, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("solver error: {0}")]
    Solver(#[from] entbound::Error),
    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Output(_) => 3,
        }
    }

    pub fn message(&self) -> String {
        match self {
            CliError::Input(m) | CliError::Output(m) => m.clone(),
            CliError::Solver(e) => e.to_string(),
        }
    }
}
