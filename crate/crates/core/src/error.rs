use crate::field::Space;

/// Error type shared by every module in this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A constructor or operation was handed a value outside its domain.
    /// `field` names the offending parameter so callers can surface it.
    #[error("invalid {field}: {message}")]
    InvalidParameter { field: &'static str, message: String },

    /// A field was in the wrong representation for the requested operation.
    #[error("field is in {found:?} space, expected {expected:?}")]
    WrongSpace { expected: Space, found: Space },

    /// Two fields or trajectories that must share a grid do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// The time stepper produced a non-finite norm. `step` is the index of
    /// the step that first failed, `time` the simulation time after it.
    #[error("solution diverged at step {step} (t = {time:e}): non-finite norm")]
    Diverged { step: usize, time: f64 },

    /// Snapshot file I/O or format trouble.
    #[error("snapshot format: {0}")]
    SnapshotFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
