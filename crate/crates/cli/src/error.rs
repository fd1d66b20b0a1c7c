use std::fmt;

use locan::ErrorKind;

/// An error together with the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

pub const EXIT_PARSE: u8 = 1;
pub const EXIT_MATH: u8 = 2;
pub const EXIT_PRECISION: u8 = 3;

impl CliError {
    pub fn parse(msg: impl Into<String>) -> Self {
        CliError { code: EXIT_PARSE, message: msg.into() }
    }

    pub fn math(msg: impl Into<String>) -> Self {
        CliError { code: EXIT_MATH, message: msg.into() }
    }
}

impl From<locan::Error> for CliError {
    fn from(e: locan::Error) -> Self {
        let code = match e.kind() {
            ErrorKind::Input => EXIT_PARSE,
            ErrorKind::Math => EXIT_MATH,
            ErrorKind::Precision => EXIT_PRECISION,
        };
        CliError { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::parse(format!("i/o error: {e}"))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}
