use cpsurf::CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Verification(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    /// Attach context naming the offending field or point.
    pub fn core(context: impl std::fmt::Display, e: CoreError) -> Self {
        let msg = format!("{context}: {e}");
        if e.is_numerical() {
            CliError::Numerical(msg)
        } else {
            CliError::Input(msg)
        }
    }
}

/// Errors that mark a point as singular rather than the run as failed.
pub fn is_singular(e: &CoreError) -> bool {
    matches!(
        e,
        CoreError::PoleAtBase(_)
            | CoreError::NullVector(_)
            | CoreError::DegenerateMetric { .. }
            | CoreError::PathThroughSingularity { .. }
            | CoreError::ZeroOfF(_)
            | CoreError::BranchCut(_)
            | CoreError::DivisionBySingularJet
            | CoreError::ZeroBase
    )
}

pub type CliResult<T> = std::result::Result<T, CliError>;
