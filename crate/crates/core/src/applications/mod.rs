//! Multiway cut-uncut through its red-blue form, and pendant subgraphs, on
//! unbreakable graphs.

use thiserror::Error;

use crate::connenum::EnumError;
use crate::graph::GraphError;
use crate::text::ParseError;
use crate::treewidth::TreewidthTooLarge;

pub mod mwcu;
pub mod pendant;

pub use mwcu::{
    mwcu_to_rbcu, rbcu_check, rbcu_separation_bound_check, rbcu_solve_unbreakable, MwcuInstance, RbcuInstance,
    RbcuRun, Reduction,
};
pub use pendant::{pendant_separation_bound_check, pendant_size_cap, pendant_solve_unbreakable, PendantInstance};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ApplicationError {
    #[error("invalid relation: {0}")]
    InvalidRelation(String),
    #[error("red edges do not form a cluster graph: {0}")]
    NotCluster(String),
    #[error("property `{0}` must take a bare graph")]
    PropertyArity(&'static str),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Enum(#[from] EnumError),
    #[error(transparent)]
    Treewidth(#[from] TreewidthTooLarge),
}

/// Default side-size schedule `s(k) = k + 2`.
pub fn default_schedule(k: usize) -> usize {
    k + 2
}
