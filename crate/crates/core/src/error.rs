use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("enumeration budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("memory budget exceeded: {0}")]
    MemoryBudget(String),
    #[error("inconsistent observation: {0}")]
    Inconsistent(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
