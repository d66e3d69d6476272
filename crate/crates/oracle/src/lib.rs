//! Brute-force reference implementations. Every routine enumerates candidates
//! straight from the definitions and shares no algorithmic code with
//! `unbreak-core`; only its data types are reused.
//!
//! All oracles are deterministic and check an [`OracleBudget`] before (and,
//! for the timeout, during) enumeration.

use std::time::{Duration, Instant};

use thiserror::Error;

pub mod connsets;
pub mod equivalence;
pub mod gen;
pub mod mwcu;
pub mod pendant;
pub mod separation;
pub mod universal;

pub use connsets::oracle_connected_sets;
pub use equivalence::{oracle_equivalence, OraclePartition};
pub use mwcu::{oracle_mwcu, oracle_rbcu};
pub use pendant::oracle_pendant;
pub use separation::{oracle_witnessing_separation, oracle_witnessing_separation_by_assignment};
pub use universal::oracle_universal_check;

/// Environment variable holding the default subset budget.
pub const BUDGET_ENV: &str = "UNBREAK_ORACLE_BUDGET";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("oracle budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("invalid oracle input: {0}")]
    InvalidInput(String),
}

/// Hard caps checked before any enumeration starts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleBudget {
    pub max_vertices: usize,
    /// Cap on the number of candidates an oracle may enumerate.
    pub max_subsets: u128,
    pub timeout: Option<Duration>,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            max_vertices: 16,
            max_subsets: 50_000_000,
            timeout: None,
        }
    }
}

impl OracleBudget {
    /// Default budget with `max_subsets` taken from [`BUDGET_ENV`] when set.
    pub fn from_env() -> Result<Self, OracleError> {
        let mut b = OracleBudget::default();
        if let Ok(raw) = std::env::var(BUDGET_ENV) {
            b.max_subsets = raw
                .trim()
                .parse()
                .map_err(|_| OracleError::InvalidInput(format!("{BUDGET_ENV}={raw} is not a number")))?;
        }
        Ok(b)
    }

    pub fn unlimited() -> Self {
        OracleBudget {
            max_vertices: usize::MAX,
            max_subsets: u128::MAX,
            timeout: None,
        }
    }

    pub(crate) fn check(&self, what: &str, n: usize, candidates: u128) -> Result<Clock, OracleError> {
        if n > self.max_vertices {
            return Err(OracleError::BudgetExceeded(format!(
                "{what}: {n} vertices exceed the cap of {}",
                self.max_vertices
            )));
        }
        if candidates > self.max_subsets {
            return Err(OracleError::BudgetExceeded(format!(
                "{what}: {candidates} candidates exceed the cap of {}",
                self.max_subsets
            )));
        }
        Ok(Clock {
            start: Instant::now(),
            timeout: self.timeout,
            what: what.to_string(),
        })
    }
}

pub(crate) struct Clock {
    start: Instant,
    timeout: Option<Duration>,
    what: String,
}

impl Clock {
    pub(crate) fn tick(&self) -> Result<(), OracleError> {
        match self.timeout {
            Some(t) if self.start.elapsed() > t => {
                Err(OracleError::BudgetExceeded(format!("{}: timed out after {t:?}", self.what)))
            }
            _ => Ok(()),
        }
    }
}

/// `n choose k` without overflow for the sizes used here.
pub(crate) fn choose(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i as u128 + 1))
}

/// Dense adjacency bitmasks over positions `0..n` (loops dropped).
pub(crate) fn adjacency_masks(g: &unbreak_core::graph::Graph) -> Vec<u64> {
    let pos = |v| g.vertices().binary_search(&v).expect("edge endpoint");
    let mut adj = vec![0u64; g.n()];
    for &(u, v) in g.edges() {
        let (a, b) = (pos(u), pos(v));
        if a != b {
            adj[a] |= 1 << b;
            adj[b] |= 1 << a;
        }
    }
    adj
}

/// Vertices reachable from `start` inside `allowed`.
pub(crate) fn reach(adj: &[u64], start: usize, allowed: u64) -> u64 {
    let mut seen = 1u64 << start;
    let mut frontier = seen;
    while frontier != 0 {
        let v = frontier.trailing_zeros() as usize;
        frontier &= frontier - 1;
        let fresh = adj[v] & allowed & !seen;
        seen |= fresh;
        frontier |= fresh;
    }
    seen
}

pub(crate) fn mask_to_set(g: &unbreak_core::graph::Graph, mask: u64) -> unbreak_core::graph::VertexSet {
    (0..g.n()).filter(|i| mask >> i & 1 == 1).map(|i| g.vertices()[i]).collect()
}
