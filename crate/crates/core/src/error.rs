use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A command was requested that the bank's current state does not allow,
    /// or at a tick earlier than its timing constraints permit.
    #[error("protocol violation: {command} in state {state}: {reason}")]
    ProtocolViolation {
        command: String,
        state: String,
        reason: String,
    },

    #[error("trace parse error at line {line}: unexpected token {token:?} ({message})")]
    Parse {
        line: usize,
        token: String,
        message: String,
    },

    #[error("undecodable address {address:#x} in request {index}{}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    UndecodableAddress {
        index: usize,
        line: Option<usize>,
        address: u64,
    },
}
