//! Harness-level errors and their process exit codes.

/// Error type for configuration loading, artifact writing, and command
/// orchestration. Solver errors pass through unchanged so their field
/// paths and divergence data stay visible to the user.
#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    /// A config file could not be parsed or fails a harness-level
    /// invariant. The message starts with the offending key or line.
    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] nls_core::Error),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    /// Process exit code contract: 0 success, 2 config error,
    /// 3 numerical divergence, 4 I/O trouble. Solver-side parameter and
    /// grid errors count as config errors because a config produced them.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Core(e) => match e {
                nls_core::Error::Diverged { .. } => 3,
                nls_core::Error::Io(_) | nls_core::Error::SnapshotFormat(_) => 4,
                _ => 2,
            },
            HarnessError::Io(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_the_contract() {
        assert_eq!(HarnessError::Config("x".into()).exit_code(), 2);
        let diverged = HarnessError::Core(nls_core::Error::Diverged { step: 3, time: 0.4 });
        assert_eq!(diverged.exit_code(), 3);
        let io = HarnessError::Io(std::io::Error::new(std::io::ErrorKind::NotFound, "gone"));
        assert_eq!(io.exit_code(), 4);
        let snapshot = HarnessError::Core(nls_core::Error::SnapshotFormat("bad magic".into()));
        assert_eq!(snapshot.exit_code(), 4);
    }

    #[test]
    fn messages_keep_the_field_path_visible() {
        let err = HarnessError::Config("path.omega: must be nonzero".into());
        assert!(err.to_string().contains("path.omega"));
    }
}
