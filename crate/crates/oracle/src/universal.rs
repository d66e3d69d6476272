//! Covering check for universal families, written against the definition.

use unbreak_core::universal::UniversalFamily;

use crate::{choose, OracleBudget, OracleError};

/// True iff for every choice of `k` distinct coordinates and every pattern on
/// them with exactly `p` ones, some vector of the family shows that pattern.
pub fn oracle_universal_check(f: &UniversalFamily, budget: &OracleBudget) -> Result<bool, OracleError> {
    let (n, k, p) = (f.n(), f.k(), f.p());
    if k > n {
        return Err(OracleError::InvalidInput(format!("k={k} exceeds n={n}")));
    }
    let patterns = choose(k, p);
    let clock = budget.check("universal family", n, choose(n, k) * patterns * f.len() as u128)?;
    let vectors: Vec<Vec<bool>> = f.masks().iter().map(|&m| (0..n).map(|i| m >> i & 1 == 1).collect()).collect();
    let mut coords: Vec<usize> = (0..k).collect();
    loop {
        clock.tick()?;
        for pattern in 0u32..1 << k {
            if pattern.count_ones() as usize != p {
                continue;
            }
            let want = |j: usize| pattern >> j & 1 == 1;
            if !vectors.iter().any(|v| coords.iter().enumerate().all(|(j, &c)| v[c] == want(j))) {
                return Ok(false);
            }
        }
        // next k-subset in lexicographic order
        let Some(i) = (0..k).rev().find(|&i| coords[i] != i + n - k) else {
            return Ok(true);
        };
        coords[i] += 1;
        for j in i + 1..k {
            coords[j] = coords[j - 1] + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_family() {
        let b = OracleBudget::default();
        // the weight-1 vectors cover every (n, k, 1) pattern
        let f = UniversalFamily::new(4, 2, 1, vec![1, 2, 4, 8]).unwrap();
        assert!(oracle_universal_check(&f, &b).unwrap());
        let missing = UniversalFamily::new(4, 2, 1, vec![1, 2, 4]).unwrap();
        assert!(!oracle_universal_check(&missing, &b).unwrap());
    }
}
