//! Finite-state machinery: properties, bounded equivalence-class tables, and
//! recursive understanding of boundaried structures.

use thiserror::Error;

use crate::boundaried::BoundariedError;
use crate::breakability::BreakError;
use crate::graph::GraphError;
use crate::text::ParseError;

pub mod property;
pub mod table;
pub mod understand;
pub mod universe;

pub use property::Property;
pub use table::{compute_classes, compute_classes_full, ClassComputation, ClassEntry, ContextIndex, RepresentativeTable};
pub use understand::{
    rejoin_gamma, solve_cmso, split_beta, understand, understand_unbreakable, DirectEvaluation,
    RecursionStep, UnbreakableSolver, Understander,
};
pub use universe::enumerate_universe;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FiniteStateError {
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("signature must start with the graph kind and list only vertex, edge and set kinds")]
    BadSignature,
    #[error("structure signature does not match the table's property `{0}`")]
    SignatureMismatch(String),
    #[error("labels must lie in 1..={max}, found {found}")]
    LabelOutOfRange { found: u32, max: u32 },
    #[error("no representative matches the structure's answers: {0}")]
    NoMatchingRepresentative(String),
    #[error("label collision while rejoining: {0}")]
    LabelCollision(String),
    #[error("separation sides must satisfy |X ∩ boundary| <= |Y ∩ boundary|")]
    UnbalancedSides,
    #[error("no free label left in 1..={0}")]
    LabelOverflow(u32),
    #[error("recursion made no progress: {0}")]
    NoProgress(String),
    #[error("unknown property `{0}`")]
    UnknownProperty(String),
    #[error("s={s} is below the minimum {min} needed for progress")]
    SideTooSmall { s: usize, min: usize },
    #[error(transparent)]
    Structure(#[from] BoundariedError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Break(#[from] BreakError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}
