use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Input outside an operation's domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// Turn-order or immutability violation by a game participant.
    #[error("protocol error: {0}")]
    Protocol(String),
    /// The adversary broke one of its own geometric obligations.
    #[error("construction bug: {0}")]
    Construction(String),
    #[error("budget exhausted: {spent} spent + {needed} needed > {budget}")]
    BudgetExhausted { spent: u64, needed: u64, budget: u64 },
    #[error("transcript: {0}")]
    Transcript(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
