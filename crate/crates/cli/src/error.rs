use std::fmt;
use std::path::Path;

use snapforge::analysis::AnalysisError;
use snapforge::brushing::BrushError;
use snapforge::distfield::DistfieldError;
use snapforge::forcemodel::ForceError;
use snapforge::metrics::MetricsError;
use snapforge::pgm::PgmError;
use snapforge::simulator::SimError;
use snapforge::surfacegen::SurfaceError;

/// Failure classes, each with its own process exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    BadArgs,
    MissingInput,
    Numerical,
    Other,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::BadArgs => 2,
            ErrorKind::MissingInput => 3,
            ErrorKind::Numerical => 4,
            ErrorKind::Other => 1,
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        Self {
            kind,
            message: message.into(),
        }
    }

    pub fn bad_args(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::BadArgs, message)
    }

    pub fn missing(path: &Path) -> Self {
        Self::new(
            ErrorKind::MissingInput,
            format!("missing input: {}", path.display()),
        )
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Numerical, message)
    }

    /// Prefixes the message, keeping the kind.
    pub fn context(self, ctx: impl fmt::Display) -> Self {
        Self {
            kind: self.kind,
            message: format!("{ctx}: {}", self.message),
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.kind.exit_code()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

/// Attaches a context string to any convertible error.
pub trait Context<T> {
    fn context(self, ctx: impl fmt::Display) -> Result<T>;
}

impl<T, E: Into<CliError>> Context<T> for std::result::Result<T, E> {
    fn context(self, ctx: impl fmt::Display) -> Result<T> {
        self.map_err(|e| e.into().context(ctx))
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        let kind = match e.kind() {
            std::io::ErrorKind::NotFound => ErrorKind::MissingInput,
            std::io::ErrorKind::InvalidData | std::io::ErrorKind::UnexpectedEof => {
                ErrorKind::BadArgs
            }
            _ => ErrorKind::Other,
        };
        Self::new(kind, e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        let kind = if e.is_io() {
            ErrorKind::Other
        } else {
            ErrorKind::BadArgs
        };
        Self::new(kind, e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        if e.is_io_error() {
            match e.into_kind() {
                csv::ErrorKind::Io(io) => io.into(),
                _ => unreachable!("checked is_io_error"),
            }
        } else {
            Self::bad_args(e.to_string())
        }
    }
}

impl From<SurfaceError> for CliError {
    fn from(e: SurfaceError) -> Self {
        match e {
            SurfaceError::Io(io) => io.into(),
            other => Self::bad_args(other.to_string()),
        }
    }
}

impl From<DistfieldError> for CliError {
    fn from(e: DistfieldError) -> Self {
        match e {
            DistfieldError::Io(io) => io.into(),
            DistfieldError::OutsideField | DistfieldError::AmbiguousDirection => {
                Self::numerical(e.to_string())
            }
            other => Self::bad_args(other.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Io(io) => io.into(),
            SimError::UnstableIntegration { .. } => Self::numerical(e.to_string()),
            other => Self::bad_args(other.to_string()),
        }
    }
}

impl From<PgmError> for CliError {
    fn from(e: PgmError) -> Self {
        match e {
            PgmError::Io(io) => io.into(),
            other => Self::bad_args(other.to_string()),
        }
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        match e {
            MetricsError::EmptyForeground => Self::numerical(e.to_string()),
            other => Self::bad_args(other.to_string()),
        }
    }
}

macro_rules! bad_args_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                Self::bad_args(e.to_string())
            }
        }
    )*};
}

bad_args_from!(ForceError, BrushError, AnalysisError);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        let nf: CliError = std::io::Error::from(std::io::ErrorKind::NotFound).into();
        assert_eq!(nf.exit_code(), 3);
        let dims: CliError = MetricsError::DimensionMismatch(1, 2, 3, 4).into();
        assert_eq!(dims.exit_code(), 2);
        let unstable: CliError = SimError::UnstableIntegration { t: 0.1 }.into();
        assert_eq!(unstable.exit_code(), 4);
        assert_eq!(unstable.context("trial x").kind, ErrorKind::Numerical);
    }
}
