use thiserror::Error;

use crate::projection::IndexSet;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("index sets {first} and {second} overlap")]
    NotDisjoint { first: IndexSet, second: IndexSet },

    #[error("coordinate {0} has no image under the relabelling")]
    UnmappedCoordinate(u64),

    #[error("relabelling is not injective: two coordinates map to {0}")]
    NonInjectiveMap(u64),

    #[error("instance too large: {what} is {actual}, limit {limit}")]
    SizeExceeded {
        what: &'static str,
        actual: usize,
        limit: usize,
    },

    #[error("family contains an empty index set")]
    InvalidFamily,

    #[error("stage {stage} is out of range 1..={max}")]
    StageOutOfRange { stage: usize, max: usize },

    #[error("stage mismatch: {0}")]
    StageMismatch(String),

    #[error("invalid tower parameters: {0}")]
    InvalidParams(String),

    #[error("truncation depth {depth} too small: tail correction factor is not positive")]
    DepthTooSmall { depth: usize },

    #[error("n = {n} is inadmissible: it must exceed the upper bound {r_hi} on R")]
    InadmissibleN { n: u64, r_hi: String },

    #[error("no witness stage found up to stage {max_stage}")]
    BudgetExhausted { max_stage: usize },

    #[error("certificate rejected: {0}")]
    InvalidCertificate(String),

    #[error("internal consistency failure: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
