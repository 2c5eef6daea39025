use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("clause has {width} literals, at most {max} allowed")]
    ClauseTooWide { width: usize, max: usize },

    #[error("variable {var} out of range 1..={max}")]
    VarOutOfRange { var: usize, max: usize },

    #[error("clause contains both {var} and -{var}")]
    ComplementaryLiterals { var: usize },

    #[error("assignment has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("set indices must be strictly increasing")]
    NotIncreasing,

    #[error("cell {cell} holds {value}, outside its alphabet")]
    Alphabet { cell: usize, value: u8 },

    #[error("ancilla ledger violated after `{routine}`: register `{register}` is nonzero")]
    Ledger { routine: String, register: String },

    #[error("circuit build error: {0}")]
    Build(String),

    #[error("math domain error: {0}")]
    Domain(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
