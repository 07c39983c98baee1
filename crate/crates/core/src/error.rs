use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("qubit index {index} out of range for a {num_qubits}-qubit state")]
    QubitOutOfRange { index: usize, num_qubits: usize },

    #[error("dimension mismatch: {left} vs {right} qubits")]
    DimensionMismatch { left: usize, right: usize },

    #[error("{0} qubits exceeds the supported maximum of {max}", max = crate::qstate::MAX_QUBITS)]
    TooManyQubits(usize),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
