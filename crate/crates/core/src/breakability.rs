//! Approximate unbreakability testing.
//!
//! [`break_alg`] either returns a separation of order at most `c` whose two
//! strict sides both exceed `⌊s / 2^c⌋`, or certifies that the graph is
//! `(s, c)`-unbreakable. It combines two searches driven by universal families:
//! one for separations with a large connected piece on each side
//! ([`find_witness_large_components`]) and one for separations where one side
//! splits into small pieces with shared neighbourhoods
//! ([`find_witness_small_components`]).
//!
//! Integer thresholds used throughout, with `t = ⌊s / 2^c⌋`:
//!
//! | quantity                         | value            |
//! |----------------------------------|------------------|
//! | emitted witness, strict sides    | `> t`            |
//! | large component                  | `>= t + 1`       |
//! | large-component family           | `(n, 2(t+1) + c, c)` |
//! | small-group size window          | `[t + 1, s + t]` |
//! | small-component family           | `(n, s + t + c, c)` |

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{
    connected_components, induced_subgraph, is_separation, neighborhood, Graph, GraphError,
    Separation, VertexSet,
};
use crate::universal::{build_universal_set_seeded, UniversalError, UniversalFamily, DEFAULT_SEED, MAX_COORDINATES};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BreakError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Universal(#[from] UniversalError),
    #[error("graphs with more than {MAX_COORDINATES} vertices are not supported (got {0})")]
    TooLarge(usize),
    #[error("internal fault: {0}")]
    InternalFault(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CutError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("terminal sets must be nonempty")]
    EmptyTerminals,
    #[error("no disjoint cut exists: terminal sets share vertex {0}")]
    Overlap(usize),
    #[error("no disjoint cut exists: edge {0}-{1} joins the terminal sets")]
    Adjacent(usize, usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BreakOutcome {
    Witness(Separation),
    Unbreakable { s: usize, c: usize },
}

impl BreakOutcome {
    pub fn witness(&self) -> Option<&Separation> {
        match self {
            BreakOutcome::Witness(sep) => Some(sep),
            BreakOutcome::Unbreakable { .. } => None,
        }
    }
}

/// Strict side threshold of emitted witnesses, `⌊s / 2^c⌋`.
pub fn witness_threshold(s: usize, c: usize) -> usize {
    if c >= usize::BITS as usize {
        0
    } else {
        s >> c
    }
}

/// Minimum vertex cut between `a` and `b` avoiding both.
pub fn min_vertex_cut(g: &Graph, a: &VertexSet, b: &VertexSet) -> Result<VertexSet, CutError> {
    g.check_subset(a)?;
    g.check_subset(b)?;
    if a.is_empty() || b.is_empty() {
        return Err(CutError::EmptyTerminals);
    }
    if let Some(&v) = a.intersection(b).next() {
        return Err(CutError::Overlap(v));
    }
    for &(u, v) in g.edges() {
        if (a.contains(&u) && b.contains(&v)) || (a.contains(&v) && b.contains(&u)) {
            return Err(CutError::Adjacent(u, v));
        }
    }
    Ok(bounded_vertex_cut(g, a, b, usize::MAX).expect("unbounded search always succeeds"))
}

/// Unit-capacity vertex-split flow network with two super terminals.
struct CutNetwork {
    /// (to, capacity, reverse edge index)
    arcs: Vec<Vec<(usize, u32, usize)>>,
}

const SOURCE: usize = 0;
const SINK: usize = 1;
const INF: u32 = u32::MAX / 2;

impl CutNetwork {
    fn add(&mut self, u: usize, v: usize, cap: u32) {
        let (ru, rv) = (self.arcs[v].len(), self.arcs[u].len());
        self.arcs[u].push((v, cap, ru));
        self.arcs[v].push((u, 0, rv));
    }

    fn augment(&mut self) -> bool {
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; self.arcs.len()];
        let mut queue = VecDeque::from([SOURCE]);
        let mut seen = vec![false; self.arcs.len()];
        seen[SOURCE] = true;
        while let Some(u) = queue.pop_front() {
            for (i, &(v, cap, _)) in self.arcs[u].iter().enumerate() {
                if cap > 0 && !seen[v] {
                    seen[v] = true;
                    prev[v] = Some((u, i));
                    if v == SINK {
                        let mut x = SINK;
                        while let Some((p, i)) = prev[x] {
                            let (_, _, rev) = self.arcs[p][i];
                            self.arcs[p][i].1 -= 1;
                            self.arcs[x][rev].1 += 1;
                            x = p;
                        }
                        return true;
                    }
                    queue.push_back(v);
                }
            }
        }
        false
    }

    fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.arcs.len()];
        seen[SOURCE] = true;
        let mut stack = vec![SOURCE];
        while let Some(u) = stack.pop() {
            for &(v, cap, _) in &self.arcs[u] {
                if cap > 0 && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }
}

/// Minimum `a`-`b` vertex cut avoiding both sets if its size is at most
/// `limit`. Callers guarantee the sets are disjoint and non-adjacent.
fn bounded_vertex_cut(g: &Graph, a: &VertexSet, b: &VertexSet, limit: usize) -> Option<VertexSet> {
    let n = g.n();
    let node_in = |i: usize| 2 + 2 * i;
    let node_out = |i: usize| 3 + 2 * i;
    let role = |i: usize| {
        let v = g.vertices()[i];
        if a.contains(&v) {
            Some(SOURCE)
        } else if b.contains(&v) {
            Some(SINK)
        } else {
            None
        }
    };
    let mut net = CutNetwork {
        arcs: vec![Vec::new(); 2 + 2 * n],
    };
    for i in 0..n {
        if role(i).is_none() {
            net.add(node_in(i), node_out(i), 1);
        }
    }
    let adj = g.dense_adjacency();
    for (u, list) in adj.iter().enumerate() {
        for &w in list {
            let from = role(u).unwrap_or(node_out(u));
            let to = role(w).unwrap_or(node_in(w));
            if from != to {
                net.add(from, to, INF);
            }
        }
    }
    let mut flow = 0usize;
    while net.augment() {
        flow += 1;
        if flow > limit {
            return None;
        }
    }
    let reach = net.reachable();
    Some(
        (0..n)
            .filter(|&i| role(i).is_none() && reach[node_in(i)] && !reach[node_out(i)])
            .map(|i| g.vertices()[i])
            .collect(),
    )
}

/// Source of universal families, cached by `(n, k, p)`.
pub struct Breaker {
    seed: u64,
    cache: Mutex<HashMap<(usize, usize, usize), Arc<UniversalFamily>>>,
}

impl Default for Breaker {
    fn default() -> Self {
        Breaker::new(DEFAULT_SEED)
    }
}

impl Breaker {
    pub fn new(seed: u64) -> Self {
        Breaker {
            seed,
            cache: Mutex::new(HashMap::new()),
        }
    }

    /// Process-wide breaker with the default seed.
    pub fn shared() -> &'static Breaker {
        static SHARED: OnceLock<Breaker> = OnceLock::new();
        SHARED.get_or_init(Breaker::default)
    }

    /// Vectors that realise every pattern with at most `k` coordinates, of
    /// which exactly `p` are one, padded as needed. When `k > n` this is every
    /// vector of weight at most `p`.
    pub fn family(&self, n: usize, k: usize, p: usize) -> Result<Arc<UniversalFamily>, BreakError> {
        let key = (n, k, p);
        if let Some(f) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(f.clone());
        }
        let family = if k > n {
            let masks = (0u64..1 << n).filter(|m| m.count_ones() as usize <= p).collect();
            UniversalFamily::new(n, n, p.min(n), masks)?
        } else {
            build_universal_set_seeded(n, k, p, self.seed)?.0
        };
        let family = Arc::new(family);
        self.cache
            .lock()
            .expect("cache lock")
            .insert(key, family.clone());
        Ok(family)
    }

    pub fn break_alg(&self, g: &Graph, s: usize, c: usize) -> Result<BreakOutcome, BreakError> {
        check(g, s)?;
        let t = witness_threshold(s, c);
        let found = match self.large_components(g, t, c)? {
            Some(sep) => Some(sep),
            None => self.small_components(g, s, t, c)?,
        };
        match found {
            Some(sep) => {
                let ok = is_separation(g, &sep.x_side, &sep.y_side)? && sep.exceeds(t, c);
                if !ok {
                    return Err(BreakError::InternalFault(format!(
                        "emitted separation fails the ({t}, {c}) witnessing check: {sep:?}"
                    )));
                }
                Ok(BreakOutcome::Witness(sep))
            }
            None => Ok(BreakOutcome::Unbreakable { s, c }),
        }
    }

    fn large_components(&self, g: &Graph, t: usize, c: usize) -> Result<Option<Separation>, BreakError> {
        let n = g.n();
        let h = t + 1;
        if n < 2 * h {
            return Ok(None);
        }
        let family = self.family(n, 2 * h + c, c)?;
        Ok(family.masks().par_iter().find_map_first(|&f| {
            let zeros = zero_set(g, f);
            let comps: Vec<VertexSet> = components_of(g, &zeros)
                .into_iter()
                .filter(|comp| comp.len() >= h)
                .collect();
            for i in 0..comps.len() {
                for j in i + 1..comps.len() {
                    if let Some(cut) = bounded_vertex_cut(g, &comps[i], &comps[j], c) {
                        return Some(side_of(g, &cut, &comps[i]));
                    }
                }
            }
            None
        }))
    }

    fn small_components(
        &self,
        g: &Graph,
        s: usize,
        t: usize,
        c: usize,
    ) -> Result<Option<Separation>, BreakError> {
        let n = g.n();
        if n < 2 * s {
            return Ok(None);
        }
        let cap = s + t;
        let family = self.family(n, cap + c, c)?;
        Ok(family.masks().par_iter().find_map_first(|&f| {
            let zeros = zero_set(g, f);
            let mut groups: BTreeMap<VertexSet, Vec<VertexSet>> = BTreeMap::new();
            for comp in components_of(g, &zeros) {
                if comp.len() > t {
                    continue;
                }
                let nb = neighborhood(g, &comp, false).expect("own vertices");
                if nb.len() <= c {
                    groups.entry(nb).or_default().push(comp);
                }
            }
            groups
                .into_iter()
                .find_map(|(nb, comps)| group_witness(g, &nb, comps, t, cap))
        }))
    }
}

fn check(g: &Graph, s: usize) -> Result<(), BreakError> {
    if s == 0 {
        return Err(GraphError::ZeroSideSize.into());
    }
    if g.n() > MAX_COORDINATES {
        return Err(BreakError::TooLarge(g.n()));
    }
    Ok(())
}

fn zero_set(g: &Graph, f: u64) -> VertexSet {
    g.vertices()
        .iter()
        .enumerate()
        .filter(|(i, _)| f >> i & 1 == 0)
        .map(|(_, &v)| v)
        .collect()
}

fn components_of(g: &Graph, u: &VertexSet) -> Vec<VertexSet> {
    connected_components(&induced_subgraph(g, u).expect("own vertices"))
}

/// `X = S ∪ (component of G - S containing comp)`, `Y = V - component`.
fn side_of(g: &Graph, cut: &VertexSet, comp: &VertexSet) -> Separation {
    let rest = g.remove_vertices(cut);
    let anchor = *comp.iter().next().expect("nonempty component");
    let side = connected_components(&rest)
        .into_iter()
        .find(|block| block.contains(&anchor))
        .expect("anchor survives the cut");
    let mut x = side.clone();
    x.extend(cut.iter().copied());
    let y = g.vertex_set().difference(&side).copied().collect();
    Separation::new(x, y)
}

/// Separation `(U ∪ N, V - U)` for a subfamily `U` of components sharing the
/// neighbourhood `nb`, if one with both strict sides above `t` is found.
fn group_witness(
    g: &Graph,
    nb: &VertexSet,
    mut comps: Vec<VertexSet>,
    t: usize,
    cap: usize,
) -> Option<Separation> {
    let n = g.n();
    let fits = |total: usize| total > t && n >= total + nb.len() + t + 1;
    let build = |chosen: &[&VertexSet]| {
        let u: VertexSet = chosen.iter().flat_map(|c| c.iter().copied()).collect();
        let mut x = u.clone();
        x.extend(nb.iter().copied());
        let y = g.vertex_set().difference(&u).copied().collect();
        Separation::new(x, y)
    };

    // Drop the largest component (ties: smallest least vertex) until the
    // group fits under the cap.
    let mut trimmed: Vec<&VertexSet> = comps.iter().collect();
    let mut total: usize = trimmed.iter().map(|c| c.len()).sum();
    while total > cap {
        let (i, _) = trimmed
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| a.len().cmp(&b.len()).then(b.first().cmp(&a.first())))
            .expect("nonempty while over cap");
        total -= trimmed.remove(i).len();
    }
    if fits(total) {
        return Some(build(&trimmed));
    }

    // Otherwise the lightest subfamily exceeding t.
    comps.sort_by_key(|c| (c.len(), c.first().copied()));
    let limit = 2 * t + 1;
    // best[w] = index of the component that last reached weight w
    let mut reach: Vec<Option<(usize, usize)>> = vec![None; limit + 1];
    let mut possible = vec![false; limit + 1];
    possible[0] = true;
    for (idx, comp) in comps.iter().enumerate() {
        let w = comp.len();
        for total in (w..=limit).rev() {
            if !possible[total] && possible[total - w] {
                possible[total] = true;
                reach[total] = Some((idx, total - w));
            }
        }
    }
    let target = (t + 1..=limit).find(|&w| possible[w])?;
    if !fits(target) {
        return None;
    }
    let mut chosen = Vec::new();
    let mut w = target;
    while w > 0 {
        let (idx, prev) = reach[w].expect("reconstructible");
        chosen.push(&comps[idx]);
        w = prev;
    }
    Some(build(&chosen))
}

/// [`Breaker::break_alg`] on the shared breaker.
pub fn break_alg(g: &Graph, s: usize, c: usize) -> Result<BreakOutcome, BreakError> {
    Breaker::shared().break_alg(g, s, c)
}

/// Searches only for separations with a component of at least `⌊s/2⌋ + 1`
/// vertices on each side; any result has both strict sides above `⌊s/2⌋`.
pub fn find_witness_large_components(g: &Graph, s: usize, c: usize) -> Result<Option<Separation>, BreakError> {
    check(g, s)?;
    Breaker::shared().large_components(g, s / 2, c)
}

/// Searches only for groups of small components sharing a neighbourhood;
/// any result has both strict sides above `⌊s/2^c⌋`.
pub fn find_witness_small_components(g: &Graph, s: usize, c: usize) -> Result<Option<Separation>, BreakError> {
    check(g, s)?;
    Breaker::shared().small_components(g, s, witness_threshold(s, c), c)
}
