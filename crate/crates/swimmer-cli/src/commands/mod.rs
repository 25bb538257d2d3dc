pub mod oscillation;
pub mod simulate;
pub mod thresholds;
pub mod viscosity;
pub mod wall;

/// Command-level error, mapped onto process exit codes in `main`.
#[derive(Debug)]
pub enum CmdError {
    Config(String),
    Numeric(String),
    Io(std::io::Error),
}

impl From<std::io::Error> for CmdError {
    fn from(e: std::io::Error) -> Self {
        CmdError::Io(e)
    }
}

impl From<swimmer::Error> for CmdError {
    fn from(e: swimmer::Error) -> Self {
        match e {
            swimmer::Error::InvalidParam { .. } => CmdError::Config(e.to_string()),
            other => CmdError::Numeric(other.to_string()),
        }
    }
}

pub type CmdResult = Result<(), CmdError>;
