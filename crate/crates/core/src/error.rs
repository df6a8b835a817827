use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("invalid entity: {0:?}")]
    InvalidEntity(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A prompt variant was asked for without the knowledge it needs.
    #[error("variant `{variant}` requires {needed}")]
    MissingKnowledge {
        variant: &'static str,
        needed: &'static str,
    },

    #[error("backend unavailable after {attempts} attempt(s): {message}")]
    BackendUnavailable {
        message: String,
        attempts: u32,
        /// Seconds the caller should wait before retrying, when the backend said so.
        retry_after: Option<u64>,
    },

    #[error("could not parse a query suggestion from backend output")]
    ParseFailure { raw_output: String },

    #[error("entity store is empty")]
    EmptyStore,

    #[error("search client failed: {0}")]
    SearchFailure(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
