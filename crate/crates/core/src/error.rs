use std::path::PathBuf;

/// Errors raised by the solver library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// The configuration document could not be parsed.
    #[error("config parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },

    /// A validated object violates one of its documented constraints.
    #[error("constraint `{constraint}` violated: {detail}")]
    Invariant {
        constraint: &'static str,
        detail: String,
    },

    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Vector or slab dimensions disagree.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Elimination hit a (near-)zero pivot.
    #[error("singular system: pivot {pivot:e} at index {index}")]
    Singular { index: usize, pivot: f64 },

    /// A member of a batched solve failed; no partial results are returned.
    #[error("batch member {member} failed: {source}")]
    BatchMember {
        member: usize,
        #[source]
        source: Box<Error>,
    },

    /// One or more column tasks failed.
    #[error("column task failed at columns {columns:?}: {first}")]
    Columns { columns: Vec<usize>, first: String },

    /// A range step failed at a known location.
    #[error("range step {step} failed ({location}): {source}")]
    Step {
        step: usize,
        location: String,
        #[source]
        source: Box<Error>,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Other(String),
}

impl Error {
    pub fn invariant(constraint: &'static str, detail: impl Into<String>) -> Self {
        Error::Invariant {
            constraint,
            detail: detail.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
