use std::fmt;
use std::path::Path;

use neurocollide::Error;

pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// A failed command: bad usage or input (exit 2) or a runtime failure (exit 1).
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn runtime(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_RUNTIME,
            message: message.into(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let input = match &e {
            Error::Io { source, .. } => source.kind() == std::io::ErrorKind::NotFound,
            Error::DegenerateTriangle { .. }
            | Error::EmptyMesh
            | Error::MismatchedBvh { .. }
            | Error::DimensionMismatch { .. }
            | Error::UnknownPreset(_)
            | Error::InvalidModel(_)
            | Error::InvalidArgument(_)
            | Error::Format(_) => true,
            _ => false,
        };
        let message = e.to_string();
        if input {
            Failure::input(message)
        } else {
            Failure::runtime(message)
        }
    }
}

/// Fails with exit code 2 naming `path` unless it is an existing file.
pub fn require_file(path: &Path, what: &str) -> Result<(), Failure> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Failure::input(format!("{what} file not found: {}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn input_errors_map_to_two() {
        assert_eq!(Failure::from(Error::Format("x".into())).code, EXIT_USAGE);
        assert_eq!(Failure::from(Error::UnknownPreset("x".into())).code, EXIT_USAGE);
        let missing = Error::Io {
            path: "a".into(),
            source: std::io::Error::from(std::io::ErrorKind::NotFound),
        };
        assert_eq!(Failure::from(missing).code, EXIT_USAGE);
    }

    #[test]
    fn runtime_errors_map_to_one() {
        assert_eq!(Failure::from(Error::NonFiniteLoss { epoch: 3 }).code, EXIT_RUNTIME);
        let denied = Error::Io {
            path: "a".into(),
            source: std::io::Error::from(std::io::ErrorKind::PermissionDenied),
        };
        assert_eq!(Failure::from(denied).code, EXIT_RUNTIME);
    }
}
