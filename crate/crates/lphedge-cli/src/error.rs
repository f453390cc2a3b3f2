//! CLI error type: wraps library and I/O failures and fixes the process
//! exit code for each class.

use std::fmt;

use lphedge::LpHedgeError;

/// Failures surfaced to the shell.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, malformed config or chain files, or inputs the library
    /// rejects as invalid or out of domain. Exit code 2.
    Usage(String),
    /// Convergence or accuracy failures inside the numerics. Exit code 3.
    Numerical(String),
    /// Filesystem failures reading inputs or writing artifacts. Exit code 1.
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 2,
            Self::Numerical(_) => 3,
            Self::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Usage(message) | Self::Numerical(message) | Self::Io(message) => {
                f.write_str(message)
            }
        }
    }
}

impl From<LpHedgeError> for CliError {
    fn from(err: LpHedgeError) -> Self {
        match err {
            LpHedgeError::InvalidInput { .. }
            | LpHedgeError::Domain { .. }
            | LpHedgeError::MissingStrikes { .. } => Self::Usage(err.to_string()),
            LpHedgeError::Numerical { .. } | LpHedgeError::Quadrature { .. } => {
                Self::Numerical(err.to_string())
            }
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        Self::Io(err.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(err: csv::Error) -> Self {
        Self::Io(err.to_string())
    }
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_the_contract() {
        assert_eq!(CliError::Usage("flag".into()).exit_code(), 2);
        assert_eq!(CliError::Numerical("tail".into()).exit_code(), 3);
        assert_eq!(CliError::Io("disk".into()).exit_code(), 1);
    }

    #[test]
    fn library_errors_map_by_category() {
        let usage = CliError::from(LpHedgeError::invalid("inverted band"));
        assert_eq!(usage.exit_code(), 2, "bad inputs are usage errors");

        let missing = CliError::from(LpHedgeError::MissingStrikes { strikes: vec![1_500.0] });
        assert_eq!(missing.exit_code(), 2, "an incomplete chain is a usage error");
        assert!(missing.to_string().contains("1500"), "message was: {missing}");

        let numerical = CliError::from(LpHedgeError::Quadrature {
            leg: "sqrt claim".into(),
            message: "tail truncation".into(),
        });
        assert_eq!(numerical.exit_code(), 3, "convergence failures are numerical errors");
    }
}
