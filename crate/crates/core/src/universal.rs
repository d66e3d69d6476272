//! `(n, k, p)`-universal families of 0/1 vectors.
//!
//! A family is universal when, for every `k`-subset `I` of the coordinates and
//! every way of choosing `p` of them to be one, some vector agrees with that
//! pattern on `I`. Coordinates are 1-based in the public API and in file
//! output; vectors are stored as `u64` masks with bit `i - 1` for coordinate
//! `i`.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::text::{records, ParseError};

pub const MAX_COORDINATES: usize = 64;
pub const DEFAULT_SEED: u64 = 0x5eed;

/// The greedy cover is used when the constraint universe is at most this big.
const GREEDY_CONSTRAINTS: u128 = 250_000;
const GREEDY_MAX_N: usize = 16;
const GREEDY_MAX_K: usize = 12;
/// Random families are verified (and patched) up to this many constraints.
const VERIFY_CONSTRAINTS: u128 = 5_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum UniversalError {
    #[error("invalid parameters n={n}, k={k}, p={p}: need 1 <= k <= n and p <= k")]
    InvalidParams { n: usize, k: usize, p: usize },
    #[error("at most {MAX_COORDINATES} coordinates are supported, got {0}")]
    TooManyCoordinates(usize),
    #[error("vector on line {line} has length {found}, expected {expected}")]
    VectorLength { line: usize, found: usize, expected: usize },
    #[error(transparent)]
    Parse(#[from] ParseError),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct UniversalFamily {
    n: usize,
    k: usize,
    p: usize,
    functions: Vec<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Greedy,
    Random,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BuildInfo {
    pub method: Method,
    pub size: usize,
    /// Whether the covering property was checked exhaustively.
    pub verified: bool,
    /// Vectors appended to repair constraints the random draw missed.
    pub patched: usize,
    /// Union bound on the probability that an unverified random family misses
    /// a constraint; zero when verified.
    pub failure_bound: f64,
}

/// A violated constraint: the coordinate subset and the coordinates that
/// should be one, both 1-based and ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub subset: Vec<usize>,
    pub ones: Vec<usize>,
}

fn check_params(n: usize, k: usize, p: usize) -> Result<(), UniversalError> {
    if n > MAX_COORDINATES {
        return Err(UniversalError::TooManyCoordinates(n));
    }
    if k == 0 || k > n || p > k {
        return Err(UniversalError::InvalidParams { n, k, p });
    }
    Ok(())
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

impl UniversalFamily {
    pub fn new(n: usize, k: usize, p: usize, functions: Vec<u64>) -> Result<Self, UniversalError> {
        check_params(n, k, p)?;
        let limit = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        let mut functions: Vec<u64> = functions.into_iter().map(|f| f & limit).collect();
        dedup_keep_order(&mut functions);
        Ok(UniversalFamily { n, k, p, functions })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn masks(&self) -> &[u64] {
        &self.functions
    }

    /// Value of vector `f` at 1-based coordinate `i`.
    pub fn value(&self, f: usize, i: usize) -> bool {
        self.functions[f] >> (i - 1) & 1 == 1
    }

    /// Restriction to the first `n2` coordinates, parameters `(n2, k, p)`.
    pub fn restrict(&self, n2: usize) -> Result<UniversalFamily, UniversalError> {
        check_params(n2, self.k, self.p)?;
        UniversalFamily::new(n2, self.k, self.p, self.functions.clone())
    }

    pub fn parse(text: &str) -> Result<UniversalFamily, UniversalError> {
        let mut header: Option<(usize, usize, usize)> = None;
        let mut functions = Vec::new();
        for rec in records(text) {
            match (rec.tag, header) {
                ("u", None) => {
                    rec.expect_fields(3)?;
                    let (n, k, p) = (rec.parse_field(0)?, rec.parse_field(1)?, rec.parse_field(2)?);
                    check_params(n, k, p)?;
                    header = Some((n, k, p));
                }
                ("u", Some(_)) => return Err(ParseError::new(rec.line, "duplicate `u` header").into()),
                (bits, Some((n, _, _))) => {
                    if !rec.fields.is_empty() || !bits.bytes().all(|b| b == b'0' || b == b'1') {
                        return Err(ParseError::new(rec.line, "expected a 0/1 string").into());
                    }
                    if bits.len() != n {
                        return Err(UniversalError::VectorLength {
                            line: rec.line,
                            found: bits.len(),
                            expected: n,
                        });
                    }
                    let mask = bits
                        .bytes()
                        .enumerate()
                        .fold(0u64, |m, (i, b)| m | (u64::from(b == b'1') << i));
                    functions.push(mask);
                }
                (_, None) => return Err(ParseError::new(rec.line, "missing `u <n> <k> <p>` header").into()),
            }
        }
        let (n, k, p) = header.ok_or_else(|| ParseError::new(1, "missing `u <n> <k> <p>` header"))?;
        UniversalFamily::new(n, k, p, functions)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("u {} {} {}\n", self.n, self.k, self.p);
        for &f in &self.functions {
            for i in 0..self.n {
                out.push(if f >> i & 1 == 1 { '1' } else { '0' });
            }
            out.push('\n');
        }
        out
    }
}

fn dedup_keep_order(v: &mut Vec<u64>) {
    let mut seen = HashSet::new();
    v.retain(|x| seen.insert(*x));
}

/// Deterministic build with the default seed.
pub fn build_universal_set(n: usize, k: usize, p: usize) -> Result<UniversalFamily, UniversalError> {
    build_universal_set_seeded(n, k, p, DEFAULT_SEED).map(|(f, _)| f)
}

pub fn build_universal_set_seeded(
    n: usize,
    k: usize,
    p: usize,
    seed: u64,
) -> Result<(UniversalFamily, BuildInfo), UniversalError> {
    check_params(n, k, p)?;
    let constraints = binomial(n, k) * binomial(k, p);
    if n <= GREEDY_MAX_N && k <= GREEDY_MAX_K && constraints <= GREEDY_CONSTRAINTS {
        let functions = greedy_cover(n, k, p);
        let size = functions.len();
        let family = UniversalFamily::new(n, k, p, functions)?;
        let info = BuildInfo {
            method: Method::Greedy,
            size,
            verified: true,
            patched: 0,
            failure_bound: 0.0,
        };
        return Ok((family, info));
    }
    let draws = random_draw_count(n, k, p);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let prob = p as f64 / k as f64;
    let mut functions: Vec<u64> = (0..draws)
        .map(|_| (0..n).fold(0u64, |m, i| m | (u64::from(rng.gen_bool(prob)) << i)))
        .collect();
    dedup_keep_order(&mut functions);
    let mut family = UniversalFamily::new(n, k, p, functions)?;
    let mut info = BuildInfo {
        method: Method::Random,
        size: 0,
        verified: false,
        patched: 0,
        failure_bound: 0.0,
    };
    if constraints <= VERIFY_CONSTRAINTS {
        while let Err(v) = verify_universal_set(&family) {
            let mask = v.ones.iter().fold(0u64, |m, i| m | 1 << (i - 1));
            family.functions.push(mask);
            info.patched += 1;
        }
        info.verified = true;
    } else {
        let hit = prob.powi(p as i32) * (1.0 - prob).powi((k - p) as i32);
        let miss = (family.len() as f64 * (1.0 - hit).ln()).exp();
        info.failure_bound = (constraints as f64 * miss).min(1.0);
    }
    info.size = family.len();
    Ok((family, info))
}

/// `⌈C(k,p) · k · ln(2 n^k)⌉`.
pub fn random_draw_count(n: usize, k: usize, p: usize) -> usize {
    let bound = binomial(k, p) as f64 * k as f64 * ((2.0f64).ln() + k as f64 * (n as f64).ln());
    bound.ceil().max(1.0) as usize
}

/// Calls `visit` with every submask of `mask` that has exactly `size` bits.
fn for_each_sized_submask(mask: u64, size: usize, visit: &mut impl FnMut(u64)) {
    fn go(bits: &[u64], size: usize, start: usize, acc: u64, visit: &mut impl FnMut(u64)) {
        if size == 0 {
            visit(acc);
            return;
        }
        for i in start..=bits.len() - size {
            go(bits, size - 1, i + 1, acc | bits[i], visit);
        }
    }
    let bits: Vec<u64> = (0..64).filter(|i| mask >> i & 1 == 1).map(|i| 1u64 << i).collect();
    if size <= bits.len() {
        go(&bits, size, 0, 0, visit);
    }
}

fn greedy_cover(n: usize, k: usize, p: usize) -> Vec<u64> {
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut uncovered: HashSet<(u64, u64)> = HashSet::new();
    for_each_sized_submask(full, k, &mut |set| {
        for_each_sized_submask(set, p, &mut |ones| {
            uncovered.insert((set, ones));
        });
    });
    let gain = |f: u64, uncovered: &HashSet<(u64, u64)>| {
        let mut g = 0usize;
        for_each_sized_submask(f, p, &mut |ones| {
            for_each_sized_submask(full & !f, k - p, &mut |zeros| {
                if uncovered.contains(&(ones | zeros, ones)) {
                    g += 1;
                }
            });
        });
        g
    };
    let mut heap = BinaryHeap::new();
    for f in 0..=full {
        let w = f.count_ones() as usize;
        if w >= p && w <= p + (n - k) {
            let g = binomial(w, p) * binomial(n - w, k - p);
            heap.push((g as usize, Reverse(f)));
        }
    }
    let mut chosen = Vec::new();
    while !uncovered.is_empty() {
        let (stale, Reverse(f)) = heap.pop().expect("every constraint is realizable");
        let fresh = gain(f, &uncovered);
        if fresh < stale {
            if fresh > 0 {
                heap.push((fresh, Reverse(f)));
            }
            continue;
        }
        for_each_sized_submask(f, p, &mut |ones| {
            for_each_sized_submask(full & !f, k - p, &mut |zeros| {
                uncovered.remove(&(ones | zeros, ones));
            });
        });
        chosen.push(f);
    }
    chosen
}

/// Lexicographic combinations of `0..n` of size `k`.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let Some(i) = (0..k).rev().find(|&i| cur[i] < n - k + i) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// Exhaustive check; on failure returns the lexicographically first violated
/// constraint (subset first, then the set of ones).
pub fn verify_universal_set(f: &UniversalFamily) -> Result<(), Violation> {
    let (n, k, p) = (f.n, f.k, f.p);
    let subsets = combinations(n, k);
    let patterns = combinations(k, p);
    let found = subsets.par_iter().find_map_first(|set| {
        let mut realized = vec![false; 1usize << k];
        for &m in &f.functions {
            let mut pat = 0usize;
            for (j, &i) in set.iter().enumerate() {
                pat |= ((m >> i & 1) as usize) << j;
            }
            if pat.count_ones() as usize == p {
                realized[pat] = true;
            }
        }
        patterns.iter().find_map(|ones| {
            let pat = ones.iter().fold(0usize, |acc, &j| acc | 1 << j);
            (!realized[pat]).then(|| Violation {
                subset: set.iter().map(|i| i + 1).collect(),
                ones: ones.iter().map(|&j| set[j] + 1).collect(),
            })
        })
    });
    match found {
        Some(v) => Err(v),
        None => Ok(()),
    }
}
