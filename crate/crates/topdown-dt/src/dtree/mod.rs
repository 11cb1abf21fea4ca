//! Decision trees, bare (unlabeled) trees, completions, cost, and tree
//! statistics.

mod oracle;
mod random;
mod serial;

pub use oracle::{optimal_depth, optimal_size};
pub use random::{random_bare_tree, random_tree};
pub use serial::{deserialize_tree, serialize_tree};

use crate::boolfn::{Restriction, TruthTable};
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};

/// A labeled binary query tree. `var` is a 1-indexed coordinate; the `lo`
/// subtree handles points with that bit 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DecisionTree {
    Leaf(i8),
    Node {
        var: usize,
        lo: Box<DecisionTree>,
        hi: Box<DecisionTree>,
    },
}

/// The same shape with unlabeled leaves; each leaf carries the restriction
/// its root-to-leaf path induces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BareTree {
    Leaf {
        path: Restriction,
    },
    Node {
        var: usize,
        lo: Box<BareTree>,
        hi: Box<BareTree>,
    },
}

/// Size (leaf count), depth, and exact average depth of a tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeStats {
    pub size: u64,
    pub depth: usize,
    pub average_depth: Dyadic,
}

impl DecisionTree {
    pub fn size(&self) -> u64 {
        match self {
            DecisionTree::Leaf(_) => 1,
            DecisionTree::Node { lo, hi, .. } => lo.size() + hi.size(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            DecisionTree::Leaf(_) => 0,
            DecisionTree::Node { lo, hi, .. } => 1 + lo.depth().max(hi.depth()),
        }
    }

    pub fn eval(&self, x: u32) -> i8 {
        match self {
            DecisionTree::Leaf(l) => *l,
            DecisionTree::Node { var, lo, hi } => {
                if (x >> (var - 1)) & 1 == 1 {
                    hi.eval(x)
                } else {
                    lo.eval(x)
                }
            }
        }
    }

    pub fn max_var(&self) -> usize {
        match self {
            DecisionTree::Leaf(_) => 0,
            DecisionTree::Node { var, lo, hi } => (*var).max(lo.max_var()).max(hi.max_var()),
        }
    }

    /// Checks that no variable repeats along any root-to-leaf path and all
    /// variables are 1-indexed and within `n` (when `n` is given).
    pub fn validate(&self, n: Option<usize>) -> Result<()> {
        fn rec(t: &DecisionTree, n: Option<usize>, path: &mut Vec<usize>) -> Result<()> {
            if let DecisionTree::Node { var, lo, hi } = t {
                if *var == 0 {
                    return Err(Error::InvalidParams("variables are 1-indexed".into()));
                }
                if let Some(n) = n {
                    if *var > n {
                        return Err(Error::CoordOutOfRange { coord: *var, n });
                    }
                }
                if path.contains(var) {
                    return Err(Error::DuplicateCoord(*var));
                }
                path.push(*var);
                rec(lo, n, path)?;
                rec(hi, n, path)?;
                path.pop();
            }
            Ok(())
        }
        rec(self, n, &mut Vec::new())
    }

    /// Forgets the leaf labels.
    pub fn bare(&self) -> BareTree {
        fn rec(t: &DecisionTree, path: Vec<(usize, bool)>) -> BareTree {
            match t {
                DecisionTree::Leaf(_) => BareTree::Leaf {
                    path: Restriction::new(path).expect("paths never repeat variables"),
                },
                DecisionTree::Node { var, lo, hi } => {
                    let mut p0 = path.clone();
                    p0.push((*var, false));
                    let mut p1 = path;
                    p1.push((*var, true));
                    BareTree::Node {
                        var: *var,
                        lo: Box::new(rec(lo, p0)),
                        hi: Box::new(rec(hi, p1)),
                    }
                }
            }
        }
        rec(self, Vec::new())
    }
}

impl BareTree {
    pub fn single_leaf() -> BareTree {
        BareTree::Leaf {
            path: Restriction::empty(),
        }
    }

    pub fn size(&self) -> u64 {
        match self {
            BareTree::Leaf { .. } => 1,
            BareTree::Node { lo, hi, .. } => lo.size() + hi.size(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            BareTree::Leaf { .. } => 0,
            BareTree::Node { lo, hi, .. } => 1 + lo.depth().max(hi.depth()),
        }
    }

    /// Checks the structural invariant: every leaf's stored restriction is
    /// exactly the (variable, branch) sequence of its path.
    pub fn validate(&self) -> Result<()> {
        fn rec(t: &BareTree, path: &mut Vec<(usize, bool)>) -> Result<()> {
            match t {
                BareTree::Leaf { path: stored } => {
                    if stored.assignments() != path.as_slice() {
                        return Err(Error::InvalidParams(format!(
                            "leaf restriction {stored:?} does not match its path {path:?}"
                        )));
                    }
                    Ok(())
                }
                BareTree::Node { var, lo, hi } => {
                    if path.iter().any(|(c, _)| c == var) {
                        return Err(Error::DuplicateCoord(*var));
                    }
                    path.push((*var, false));
                    rec(lo, path)?;
                    path.last_mut().expect("pushed").1 = true;
                    rec(hi, path)?;
                    path.pop();
                    Ok(())
                }
            }
        }
        rec(self, &mut Vec::new())
    }
}

/// Leaf-count, depth, and exact average depth `Σ_leaves 2^{-|ℓ|}·|ℓ|`.
pub fn stats(t: &DecisionTree) -> TreeStats {
    fn rec(t: &DecisionTree, depth: usize, avg: &mut Dyadic) {
        match t {
            DecisionTree::Leaf(_) => {
                *avg = &*avg + &Dyadic::from_int(depth as i64).div_pow2(depth as u32);
            }
            DecisionTree::Node { lo, hi, .. } => {
                rec(lo, depth + 1, avg);
                rec(hi, depth + 1, avg);
            }
        }
    }
    let mut avg = Dyadic::zero();
    rec(t, 0, &mut avg);
    TreeStats {
        size: t.size(),
        depth: t.depth(),
        average_depth: avg,
    }
}

/// Materializes the function a tree computes, over `n` variables.
pub fn to_truth_table(t: &DecisionTree, n: usize) -> Result<TruthTable> {
    if t.max_var() > n {
        return Err(Error::CoordOutOfRange {
            coord: t.max_var(),
            n,
        });
    }
    match t {
        DecisionTree::Leaf(l) => TruthTable::constant(n, *l),
        DecisionTree::Node { var, lo, hi } => {
            let cond = TruthTable::coordinate(n, *var)?;
            let lo_t = to_truth_table(lo, n)?;
            let hi_t = to_truth_table(hi, n)?;
            TruthTable::select(&cond, &hi_t, &lo_t)
        }
    }
}

fn walk_leaves<T>(
    bare: &BareTree,
    f: &TruthTable,
    live: &[usize],
    depth: usize,
    on_leaf: &mut impl FnMut(&TruthTable, usize) -> T,
) -> Result<BareWalk<T>> {
    match bare {
        BareTree::Leaf { .. } => Ok(BareWalk::Leaf(on_leaf(f, depth))),
        BareTree::Node { var, lo, hi } => {
            let pos = live
                .iter()
                .position(|c| c == var)
                .ok_or(Error::CoordOutOfRange {
                    coord: *var,
                    n: live.len(),
                })?;
            let sub_live: Vec<usize> = live.iter().copied().filter(|c| c != var).collect();
            let f0 = f.restrict_one(pos + 1, false)?;
            let f1 = f.restrict_one(pos + 1, true)?;
            let l = walk_leaves(lo, &f0, &sub_live, depth + 1, on_leaf)?;
            let h = walk_leaves(hi, &f1, &sub_live, depth + 1, on_leaf)?;
            Ok(BareWalk::Node(*var, Box::new(l), Box::new(h)))
        }
    }
}

enum BareWalk<T> {
    Leaf(T),
    Node(usize, Box<BareWalk<T>>, Box<BareWalk<T>>),
}

/// Labels every leaf of `bare` with `sign(E[f_ℓ])` (ties, mean exactly zero,
/// go to +1), the completion minimizing disagreement with `f`.
pub fn f_completion(bare: &BareTree, f: &TruthTable) -> Result<DecisionTree> {
    let live: Vec<usize> = (1..=f.n()).collect();
    let walk = walk_leaves(bare, f, &live, 0, &mut |sub, _| {
        if sub.mean().is_negative() {
            -1i8
        } else {
            1i8
        }
    })?;
    fn rebuild(w: BareWalk<i8>) -> DecisionTree {
        match w {
            BareWalk::Leaf(l) => DecisionTree::Leaf(l),
            BareWalk::Node(var, lo, hi) => DecisionTree::Node {
                var,
                lo: Box::new(rebuild(*lo)),
                hi: Box::new(rebuild(*hi)),
            },
        }
    }
    Ok(rebuild(walk))
}

/// `cost_f(T°) = Σ_leaves 2^{-|ℓ|}·Inf(f_ℓ)`, exactly.
pub fn cost(bare: &BareTree, f: &TruthTable) -> Result<Dyadic> {
    let live: Vec<usize> = (1..=f.n()).collect();
    let mut total = Dyadic::zero();
    walk_leaves(bare, f, &live, 0, &mut |sub, depth| {
        total = &total + &sub.total_influence().div_pow2(depth as u32);
    })?;
    Ok(total)
}

/// Completion error `error(T°, f)` without materializing the completion:
/// `Σ_leaves 2^{-|ℓ|}·error(f_ℓ, ±1)`.
pub fn completion_error(bare: &BareTree, f: &TruthTable) -> Result<Dyadic> {
    let live: Vec<usize> = (1..=f.n()).collect();
    let mut total = Dyadic::zero();
    walk_leaves(bare, f, &live, 0, &mut |sub, depth| {
        total = &total + &sub.error_pm1().div_pow2(depth as u32);
    })?;
    Ok(total)
}

/// Shape access shared by labeled and bare trees, for the pruning test.
pub trait TreeShape {
    fn as_node(&self) -> Option<(usize, &Self, &Self)>;
}

impl TreeShape for DecisionTree {
    fn as_node(&self) -> Option<(usize, &Self, &Self)> {
        match self {
            DecisionTree::Leaf(_) => None,
            DecisionTree::Node { var, lo, hi } => Some((*var, lo, hi)),
        }
    }
}

impl TreeShape for BareTree {
    fn as_node(&self) -> Option<(usize, &Self, &Self)> {
        match self {
            BareTree::Leaf { .. } => None,
            BareTree::Node { var, lo, hi } => Some((*var, lo, hi)),
        }
    }
}

/// True iff `small`'s internal-node structure is a prefix of `big`'s: every
/// internal node of `small` appears in `big` with the same variable.
pub fn is_pruning_of<T: TreeShape>(small: &T, big: &T) -> bool {
    match (small.as_node(), big.as_node()) {
        (None, _) => true,
        (Some(_), None) => false,
        (Some((v1, l1, h1)), Some((v2, l2, h2))) => {
            v1 == v2 && is_pruning_of(l1, l2) && is_pruning_of(h1, h2)
        }
    }
}
