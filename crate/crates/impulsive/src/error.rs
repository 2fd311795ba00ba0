use std::path::Path;

use impulsive_core::Error;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFICATION_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Core(Error),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => EXIT_USAGE,
            CliError::Core(e) if e.is_numerical() => EXIT_NUMERICAL,
            CliError::Core(
                Error::MultiplePreimages { .. } | Error::H2Violation { .. } | Error::DwellViolation { .. },
            ) => EXIT_VERIFICATION_FAILED,
            CliError::Core(_) => EXIT_USAGE,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use impulsive_core::StatePoint;

    #[test]
    fn codes_follow_error_kind() {
        assert_eq!(CliError::usage("x").exit_code(), EXIT_USAGE);
        let zeno = Error::ZenoSuspect { time: 1.0, jumps: 5000 };
        assert_eq!(CliError::from(zeno).exit_code(), EXIT_NUMERICAL);
        let syntax = Error::Syntax {
            pos: 3,
            message: "unexpected token".into(),
        };
        assert_eq!(CliError::from(syntax).exit_code(), EXIT_USAGE);
        let p = StatePoint::from_slice(&[0.0]).unwrap();
        let h2 = Error::H2Violation {
            point: p.clone(),
            image: p,
            g: 0.0,
        };
        assert_eq!(CliError::from(h2).exit_code(), EXIT_VERIFICATION_FAILED);
    }
}
