use sqcqp_core::Error;
use thiserror::Error as ThisError;

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("budget or resource limit: {0}")]
    Budget(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 2 for bad input, 3 for budget or resource limits, 4 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) | CliError::Io(_) => 2,
            CliError::Budget(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::InvalidInput(_) | Error::DegenerateDesign(_) | Error::InfeasibleSupport { .. } => CliError::Input(msg),
            Error::BudgetExceeded(_) | Error::ResourceLimit(_) => CliError::Budget(msg),
            Error::SingularPivot { .. }
            | Error::SingularConditioning { .. }
            | Error::ExhaustedSupport { .. }
            | Error::UndefinedBound(_)
            | Error::Numerical(_) => CliError::Numerical(msg),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Input(e.to_string())
    }
}
