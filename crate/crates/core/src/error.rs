use thiserror::Error;

use crate::gf::GfError;
use crate::linalg::LinalgError;

/// Errors surfaced by the maintainers.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error(transparent)]
    Field(#[from] GfError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("rank cap k must be positive")]
    KTooSmall,
    #[error("structure is already active")]
    AlreadyActive,
    #[error("structure is already inactive")]
    AlreadyInactive,
    #[error("initial matrix is singular")]
    SingularInit,
    #[error("no update to revert")]
    EmptyLog,
    #[error("label [{lo}, {hi}] is not a node of the interval tree over {n} leaves")]
    BadLabel { lo: usize, hi: usize, n: usize },
    #[error("randomized step failed after resampling: {0}")]
    ProbabilisticFailure(&'static str),
    #[error("self loop at vertex {0}")]
    SelfLoop(usize),
    #[error("negative weight {0}")]
    NegativeWeight(i64),
    #[error("weight {weight} exceeds the declared maximum {max}")]
    WeightTooLarge { weight: u64, max: u64 },
    #[error("edge ({0}, {1}) already present")]
    DuplicateInsert(usize, usize),
    #[error("edge ({0}, {1}) not present")]
    MissingDelete(usize, usize),
    #[error("edge ({0}, {1}) does not join the left and right sides")]
    NotBipartite(usize, usize),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_index(index: usize, bound: usize) -> Result<()> {
    if index < bound {
        Ok(())
    } else {
        Err(LinalgError::IndexOutOfRange { index, bound }.into())
    }
}
