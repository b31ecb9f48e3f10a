use manifold_ctrl::odesim::SimError;
use manifold_ctrl::ControlError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    ConfigParse(String),
    #[error("{0}")]
    InvalidGains(String),
    #[error("{0}")]
    SimulationDiverged(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ConfigParse(_) => 2,
            CliError::InvalidGains(_) => 3,
            CliError::SimulationDiverged(_) => 4,
            CliError::Io { .. } => 5,
        }
    }

    /// Stable machine-readable category.
    pub fn category(&self) -> &'static str {
        match self {
            CliError::ConfigParse(_) => "config-parse",
            CliError::InvalidGains(_) => "invalid-gains",
            CliError::SimulationDiverged(_) => "simulation-diverged",
            CliError::Io { .. } => "io",
        }
    }

    pub(crate) fn io(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> CliError {
        let context = context.into();
        move |source| CliError::Io { context, source }
    }
}

impl From<ControlError> for CliError {
    fn from(e: ControlError) -> Self {
        CliError::InvalidGains(e.to_string())
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::InvalidConfig(msg) => CliError::ConfigParse(msg),
            other => CliError::SimulationDiverged(other.to_string()),
        }
    }
}
