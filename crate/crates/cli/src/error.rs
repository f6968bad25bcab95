use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("region violation: {0}")]
    Region(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Region(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 3,
        }
    }
}

impl From<opcalc_core::Error> for CliError {
    fn from(e: opcalc_core::Error) -> Self {
        if e.is_region_error() {
            CliError::Region(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}
