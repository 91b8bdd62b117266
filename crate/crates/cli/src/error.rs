use std::fmt;

/// Process exit status for a failed run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    /// Malformed input, missing files, invalid flags.
    Input = 2,
    /// Well-formed data that cannot support an estimate.
    Statistical = 3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub kind: ExitKind,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            kind: ExitKind::Input,
            message: message.into(),
        }
    }

    pub fn statistical(message: impl Into<String>) -> Self {
        Self {
            kind: ExitKind::Statistical,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        self.kind as u8
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

/// Statistical core errors exit with 3, everything else with 2.
impl From<aadcurve::Error> for CliError {
    fn from(e: aadcurve::Error) -> Self {
        if e.is_statistical() {
            Self::statistical(e.to_string())
        } else {
            Self::input(e.to_string())
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
