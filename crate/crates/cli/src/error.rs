use std::fmt;

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Config = 1,
    Data = 2,
    Numeric = 3,
}

/// An error tagged with the exit code it should produce.
#[derive(Debug)]
pub struct CliError {
    pub kind: ExitKind,
    pub source: anyhow::Error,
}

impl CliError {
    pub fn config(msg: impl fmt::Display) -> Self {
        CliError {
            kind: ExitKind::Config,
            source: anyhow::anyhow!("{msg}"),
        }
    }

    pub fn data(msg: impl fmt::Display) -> Self {
        CliError {
            kind: ExitKind::Data,
            source: anyhow::anyhow!("{msg}"),
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.kind as i32
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.source)
    }
}

impl From<zampling::Error> for CliError {
    fn from(e: zampling::Error) -> Self {
        let kind = if e.is_numeric_error() {
            ExitKind::Numeric
        } else if e.is_data_error() {
            ExitKind::Data
        } else {
            ExitKind::Config
        };
        CliError { kind, source: e.into() }
    }
}

/// Failures writing metrics count as configuration errors (bad `--out`).
impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError {
            kind: ExitKind::Config,
            source: e.into(),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError {
            kind: ExitKind::Config,
            source: e.into(),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError {
            kind: ExitKind::Config,
            source: e.into(),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
