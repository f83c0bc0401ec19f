use thiserror::Error;

/// Errors produced across the library. Each variant maps onto one of the
/// stable CLI exit codes (see [`Error::exit_code`]).
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at `{token}`: {reason}")]
    Parse { token: String, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("trivial model: {0}")]
    Trivial(String),

    #[error("trivial projection: no {missing} weight after projecting onto slope {p}/{q}")]
    TrivialProjection { missing: &'static str, p: u64, q: u64 },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("memory budget exceeded: need about {needed} bytes, budget is {budget} bytes")]
    MemoryBudget { needed: u128, budget: u128 },

    #[error("trial cap of {cap} exceeded after {trials} proposals")]
    TrialCap { cap: u64, trials: u64 },

    #[error("no walk of length {n} exists for this model")]
    NoWalk { n: usize },

    #[error("refusing brute-force enumeration for n = {n} (limit {limit})")]
    Refused { n: usize, limit: usize },

    #[error("fit error: {0}")]
    Fit(String),

    #[error("grammar validation failed in rule {rule}: undefined symbol {symbol}")]
    DanglingSymbol { rule: String, symbol: String },

    #[error("cache load error: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Exit code contract of the command-line tool: 2 for usage, parse and
    /// domain problems, 3 for resource limits.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::MemoryBudget { .. } | Error::TrialCap { .. } | Error::Refused { .. } => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
