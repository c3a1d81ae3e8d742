//! Dynamic rank, basis, full-rank submatrix and matching maintenance over
//! prime fields.

pub mod basis;
pub mod combi;
pub mod dyninv;
pub mod dynrank;
pub mod error;
pub mod gadget;
pub mod gf;
pub mod linalg;
pub mod matching;
pub mod oracle;
pub mod rankred;
pub mod sketch;
pub mod submatrix;

pub use basis::{BasisMaintainer, DyadicProducts, LowRankBasis, PlainBasis};
pub use combi::{CombiMatcher, HybridGraph};
pub use dyninv::{DynInv, EntryDelta, Outcome};
pub use dynrank::{DynRank, RankStructure};
pub use error::{Error, Result};
pub use gadget::{Gadget, GadgetTree, Label, Slot};
pub use gf::{FieldElement, FieldRng, GfError, PrimeField, DEFAULT_PRIME};
pub use linalg::{DenseMatrix, LinalgError, SparseVec};
pub use matching::{BipartiteMatching, GeneralMatching, MatchedVertexSet, WeightedMatching};
pub use rankred::{BoundedRank, UnboundedRank};
pub use sketch::SketchMatrix;
pub use submatrix::{SearchStats, SubmatrixState};
