//! Unbreakability testing, boundaried structures, recursive understanding and
//! solvers for problems on unbreakable graphs.

pub mod applications;
pub mod boundaried;
pub mod breakability;
pub mod connenum;
pub mod finite_state;
pub mod graph;
pub mod text;
pub mod treewidth;
pub mod universal;
