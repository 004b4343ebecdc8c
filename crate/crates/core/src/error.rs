use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("rank {0} is outside 1..=26")]
    InvalidRank(usize),

    #[error("invalid letter {found:?} at position {position} (rank {rank})")]
    InvalidLetter {
        found: String,
        position: usize,
        rank: usize,
    },

    #[error("alphabet mismatch: rank {left} against rank {right}")]
    AlphabetMismatch { left: usize, right: usize },

    #[error("the empty word has no primitive root")]
    EmptyWordNoRoot,

    #[error("fringe enumeration refused: {vertices} vertices exceeds the limit of {limit} (Bell-number growth)")]
    FringeTooLarge { vertices: usize, limit: usize },

    #[error("search budget exceeded: {explored} states explored, budget {budget}")]
    BudgetExceeded { explored: u64, budget: u64 },

    #[error("every word of the target tuple is trivial")]
    DegenerateTuple,

    #[error("tuple lengths differ: {left} against {right}")]
    TupleLengthMismatch { left: usize, right: usize },

    #[error("target words must be pairwise distinct")]
    DuplicateTargets,

    #[error("Hall basis of size {size} exceeds the cap of {cap}")]
    BasisTooLarge { size: usize, cap: usize },

    #[error("element is not in the derived subgroup")]
    NotInDerivedSubgroup,

    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("inconsistency: {0}")]
    Inconsistency(String),
}
