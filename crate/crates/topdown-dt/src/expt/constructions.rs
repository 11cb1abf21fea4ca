//! Explicit small decision trees for the separation families.
//!
//! These witness the upper-bound columns of the separation tables: each
//! builder follows the family's own case analysis, and the tests verify the
//! built tree computes the family function exactly, so its size is a
//! certified upper bound on the optimal size.

use crate::boolfn::{FamilyParams, Layout, TribesInfo};
use crate::dtree::DecisionTree;
use crate::error::Result;

fn leaf(l: i8) -> DecisionTree {
    DecisionTree::Leaf(l)
}

fn node(var: usize, lo: DecisionTree, hi: DecisionTree) -> DecisionTree {
    DecisionTree::Node {
        var,
        lo: Box::new(lo),
        hi: Box::new(hi),
    }
}

fn coord_node(var: usize) -> DecisionTree {
    node(var, leaf(-1), leaf(1))
}

/// Size `4h + 2`: queries each level's x-pair before its y, recursing on the
/// single both-zero branch.
pub fn exact_nonmonotone_tree(h: usize, layout: &Layout) -> DecisionTree {
    let mut tree = coord_node(layout.z_coords()[0]);
    for level in 1..=h {
        let xs = &layout
            .block("x", Some(level as u32), None)
            .expect("x block")
            .coords;
        let y = layout
            .block("y", Some(level as u32), None)
            .expect("y block")
            .coords[0];
        tree = node(xs[0], node(xs[1], tree, coord_node(y)), coord_node(y));
    }
    tree
}

/// Size `12h + 2`: per level, once some coordinate above the pivot
/// `(0,0,1,1)` is set the branch can only end at +1 or `y`, so the level
/// needs a single recursive branch and terminates the others early.
pub fn exact_monotone_tree(h: usize, layout: &Layout) -> DecisionTree {
    let mut tree = coord_node(layout.z_coords()[0]);
    for level in 1..=h {
        let xs = &layout
            .block("x", Some(level as u32), None)
            .expect("x block")
            .coords;
        let y = layout
            .block("y", Some(level as u32), None)
            .expect("y block")
            .coords[0];
        // With x1 or x2 set the point is incomparable to the pivot unless
        // x3 = x4 = 1, where it lies strictly above.
        let upper = |y: usize, xs: &[usize]| {
            node(xs[2], coord_node(y), node(xs[3], coord_node(y), leaf(1)))
        };
        // With x1 = x2 = 0 the point lies at or below the pivot: recurse at
        // x3 = x4 = 1, output -1 otherwise.
        let lower = node(xs[2], leaf(-1), node(xs[3], leaf(-1), tree));
        tree = node(xs[0], node(xs[1], lower, upper(y, xs)), upper(y, xs));
    }
    tree
}

/// Read-once DNF evaluation tree: term by term, exiting to `on_true` when a
/// term is fully satisfied and to `on_false` after the last term fails.
/// Exits are fresh copies, as trees cannot share subtrees.
fn dnf_tree(
    coords: &[usize],
    width: usize,
    terms: usize,
    on_true: &DecisionTree,
    on_false: &DecisionTree,
) -> DecisionTree {
    fn rec(
        coords: &[usize],
        width: usize,
        terms: usize,
        term: usize,
        pos: usize,
        on_true: &DecisionTree,
        on_false: &DecisionTree,
    ) -> DecisionTree {
        if term == terms {
            return on_false.clone();
        }
        let var = coords[term * width + pos];
        let fail = rec(coords, width, terms, term + 1, 0, on_true, on_false);
        let succeed = if pos + 1 == width {
            on_true.clone()
        } else {
            rec(coords, width, terms, term, pos + 1, on_true, on_false)
        };
        node(var, fail, succeed)
    }
    rec(coords, width, terms, 0, 0, on_true, on_false)
}

/// Count-tracking majority tree, terminating as soon as the outcome is
/// decided.
fn majority_tree(coords: &[usize], ones: usize, zeros: usize) -> DecisionTree {
    let k = coords.len() + ones + zeros;
    if 2 * ones > k {
        return leaf(1);
    }
    if 2 * zeros >= k {
        return leaf(-1);
    }
    node(
        coords[0],
        majority_tree(&coords[1..], ones, zeros + 1),
        majority_tree(&coords[1..], ones + 1, zeros),
    )
}

/// Threshold-then-parity construction: evaluates `Threshold_{ℓ,1}` with an
/// early exit at the second one, recursing on every rejecting branch.
pub fn approx_nonmonotone_tree(
    p: &FamilyParams,
    layout: &Layout,
    tribes: &TribesInfo,
) -> Result<DecisionTree> {
    let z = layout.z_coords();
    let mut tree = dnf_tree(&z, tribes.width, tribes.terms, &leaf(1), &leaf(-1));
    for level in 1..=p.h {
        let xs = &layout
            .block("x", Some(level as u32), None)
            .expect("x block")
            .coords;
        let ys = &layout
            .block("y", Some(level as u32), None)
            .expect("y block")
            .coords;
        let accept = parity_tree(ys, false);
        tree = threshold_tree(xs, 0, 0, &accept, &tree);
    }
    Ok(tree)
}

fn parity_tree(coords: &[usize], acc: bool) -> DecisionTree {
    match coords {
        [] => leaf(if acc { 1 } else { -1 }),
        [first, rest @ ..] => node(*first, parity_tree(rest, acc), parity_tree(rest, !acc)),
    }
}

/// `Threshold_{ℓ,1}`: accept once all coords are seen with at most one set;
/// reject (recurse) at the second one.
fn threshold_tree(
    xs: &[usize],
    pos: usize,
    ones: usize,
    accept: &DecisionTree,
    reject: &DecisionTree,
) -> DecisionTree {
    if ones >= 2 {
        return reject.clone();
    }
    if pos == xs.len() {
        return accept.clone();
    }
    node(
        xs[pos],
        threshold_tree(xs, pos + 1, ones, accept, reject),
        threshold_tree(xs, pos + 1, ones + 1, accept, reject),
    )
}

/// Paired biased-Tribes gates, then constants / majority / recursion.
pub fn approx_monotone_tree(
    p: &FamilyParams,
    layout: &Layout,
    gate1: &TribesInfo,
    gate2: &TribesInfo,
    base: &TribesInfo,
) -> Result<DecisionTree> {
    let z = layout.z_coords();
    let mut tree = dnf_tree(&z, base.width, base.terms, &leaf(1), &leaf(-1));
    for level in 1..=p.h {
        let x1 = &layout
            .block("x", Some(level as u32), Some(1))
            .expect("x1 block")
            .coords;
        let x2 = &layout
            .block("x", Some(level as u32), Some(2))
            .expect("x2 block")
            .coords;
        let ys = &layout
            .block("y", Some(level as u32), None)
            .expect("y block")
            .coords;
        let maj = majority_tree(ys, 0, 0);
        // Gate 1 accepted: gate 2 picks +1 over Maj; rejected: picks f_{h-1}
        // over -1.
        let accept_side = dnf_tree(x2, gate2.width, gate2.terms, &leaf(1), &maj);
        let reject_side = dnf_tree(x2, gate2.width, gate2.terms, &tree, &leaf(-1));
        tree = dnf_tree(x1, gate1.width, gate1.terms, &accept_side, &reject_side);
    }
    Ok(tree)
}
