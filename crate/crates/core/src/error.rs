use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown node id {0}")]
    UnknownNode(u64),

    #[error("objects belong to different trees")]
    MismatchedTrees,

    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("invalid kernel at node {node}: {reason}")]
    InvalidKernel { node: u64, reason: String },

    #[error("payoff is negative at node {node}")]
    NegativePayoff { node: u64 },

    #[error("invalid stopping time: {0}")]
    InvalidStoppingTime(String),

    #[error("stopping times are not ordered: {0}")]
    NotOrdered(String),

    #[error("measure is not a member of the family (first mismatch at node {node})")]
    NotAMember { node: u64 },

    #[error("enumeration too large: {count} items exceeds budget {budget}")]
    EnumerationTooLarge { count: u128, budget: u128 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("schema violation at {location}: {reason}")]
    Schema { location: String, reason: String },

    #[error("json error at line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

impl Error {
    /// Exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::EnumerationTooLarge { .. } => 4,
            Error::Io(_) => 5,
            _ => 3,
        }
    }
}
