use thiserror::Error;

#[derive(Debug, Error)]
pub enum SacError {
    #[error(transparent)]
    Sim(#[from] cogrisk_core::SimError),
    #[error(transparent)]
    Nn(#[from] cogrisk_neural::NnError),
    #[error("invalid configuration: {0}")]
    Config(String),
    /// A loss went non-finite; `dump` holds the offending minibatch as JSON.
    #[error("non-finite {what} at update {update}")]
    NonFinite { what: String, update: u64, dump: String },
}

pub type Result<T> = std::result::Result<T, SacError>;
