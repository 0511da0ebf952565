use std::fmt;

use crate::config::ConfigError;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError { code: EXIT_CONFIG, message: msg.into() }
    }

    pub fn data(msg: impl Into<String>) -> Self {
        CliError { code: EXIT_DATA, message: msg.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::config(e.0)
    }
}

impl From<cdiff::Error> for CliError {
    fn from(e: cdiff::Error) -> Self {
        use cdiff::Error::*;
        let code = match &e {
            InvalidParameter(_) => EXIT_CONFIG,
            InvalidData(_) | DegenerateData(_) | ShapeError(_) | MinLength { .. } | Parse { .. } | Io { .. } => {
                EXIT_DATA
            }
            SymmetryViolation { .. } | NumericalFailure(_) => EXIT_NUMERICAL,
        };
        CliError { code, message: e.to_string() }
    }
}
