//! Brute-force optimal decision-tree oracle.
//!
//! Exact minimum size (leaf count) and depth over all trees computing `f`,
//! by memoized recursion over subfunctions. The memo key canonicalizes a
//! subfunction by dropping its irrelevant coordinates first, which collapses
//! isomorphic subproblems; that is what lets the oracle reach n = 16.

use std::collections::HashMap;

use crate::boolfn::TruthTable;
use crate::error::{Error, Result};

const ORACLE_MAX_VARS: usize = 16;

type Key = (usize, Vec<u64>);

fn key_of(t: &TruthTable) -> Key {
    (t.n(), t.words().to_vec())
}

/// Smallest leaf count of any decision tree exactly computing `f`.
pub fn optimal_size(f: &TruthTable) -> Result<u64> {
    if f.n() > ORACLE_MAX_VARS {
        return Err(Error::OracleTooLarge(f.n()));
    }
    let mut memo = HashMap::new();
    Ok(size_rec(f, &mut memo))
}

fn size_rec(f: &TruthTable, memo: &mut HashMap<Key, u64>) -> u64 {
    if f.is_constant() {
        return 1;
    }
    let (g, _) = f.drop_irrelevant();
    let key = key_of(&g);
    if let Some(&v) = memo.get(&key) {
        return v;
    }
    let mut best = u64::MAX;
    for i in 1..=g.n() {
        let lo = size_rec(&g.restrict_one(i, false).expect("coord in range"), memo);
        let hi = size_rec(&g.restrict_one(i, true).expect("coord in range"), memo);
        best = best.min(lo + hi);
    }
    memo.insert(key, best);
    best
}

/// Smallest depth of any decision tree exactly computing `f`.
pub fn optimal_depth(f: &TruthTable) -> Result<u32> {
    if f.n() > ORACLE_MAX_VARS {
        return Err(Error::OracleTooLarge(f.n()));
    }
    let mut memo = HashMap::new();
    Ok(depth_rec(f, &mut memo))
}

fn depth_rec(f: &TruthTable, memo: &mut HashMap<Key, u32>) -> u32 {
    if f.is_constant() {
        return 0;
    }
    let (g, _) = f.drop_irrelevant();
    let key = key_of(&g);
    if let Some(&v) = memo.get(&key) {
        return v;
    }
    let mut best = u32::MAX;
    for i in 1..=g.n() {
        let lo = depth_rec(&g.restrict_one(i, false).expect("coord in range"), memo);
        let hi = depth_rec(&g.restrict_one(i, true).expect("coord in range"), memo);
        best = best.min(1 + lo.max(hi));
    }
    memo.insert(key, best);
    best
}
