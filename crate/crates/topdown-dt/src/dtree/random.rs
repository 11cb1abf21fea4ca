//! Seeded random tree generators used throughout the test corpora.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{BareTree, DecisionTree};
use crate::error::{Error, Result};

/// A uniform-ish random decision tree with exactly `s` leaves (capped at
/// `2^n`), no repeated variable on any path, and random ±1 leaf labels.
/// Deterministic in the seed.
pub fn random_tree(n: usize, s: usize, seed: u64) -> Result<DecisionTree> {
    if n == 0 || n > crate::boolfn::MAX_VARS {
        return Err(Error::InvalidParams(format!("n = {n} out of range")));
    }
    if s == 0 {
        return Err(Error::InvalidParams("tree size must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let avail: Vec<usize> = (1..=n).collect();
    let max_leaves = 1u64.checked_shl(n as u32).unwrap_or(u64::MAX);
    Ok(grow(&avail, (s as u64).min(max_leaves), &mut rng))
}

fn grow(avail: &[usize], s: u64, rng: &mut ChaCha8Rng) -> DecisionTree {
    if s <= 1 || avail.is_empty() {
        return DecisionTree::Leaf(if rng.gen_bool(0.5) { 1 } else { -1 });
    }
    let half_cap = if avail.len() > 63 {
        u64::MAX
    } else {
        1u64 << (avail.len() - 1)
    };
    let lo_min = 1.max(s.saturating_sub(half_cap));
    let lo_max = (s - 1).min(half_cap);
    let s_lo = rng.gen_range(lo_min..=lo_max);
    let var = avail[rng.gen_range(0..avail.len())];
    let rest: Vec<usize> = avail.iter().copied().filter(|&c| c != var).collect();
    DecisionTree::Node {
        var,
        lo: Box::new(grow(&rest, s_lo, rng)),
        hi: Box::new(grow(&rest, s - s_lo, rng)),
    }
}

/// Random bare-tree shape with `s` leaves.
pub fn random_bare_tree(n: usize, s: usize, seed: u64) -> BareTree {
    random_tree(n, s, seed).expect("valid parameters").bare()
}
