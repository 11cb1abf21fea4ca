//! The greedy top-down tree builder with pluggable splitting criteria.
//!
//! Each iteration scores every leaf with the best variable for the active
//! criterion, splits the highest-scoring leaf, and stops once the completion
//! is accurate enough (or a size budget is hit). Influence and correlation
//! scores are exact dyadics; impurity scores run in double precision with
//! ties declared at absolute difference ≤ 1e-12. Ties go to the lowest
//! coordinate index within a leaf and to the leftmost leaf across leaves
//! (paths compared as binary strings, 0 < 1).

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::boolfn::{Layout, Restriction, TruthTable};
use crate::dtree::{BareTree, DecisionTree};
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::frac::Frac;

/// Impurity functions: concave, symmetric around 1/2, `G(0)=G(1)=0`,
/// `G(1/2)=1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ImpurityFn {
    /// Binary entropy.
    Entropy,
    /// `4p(1-p)`.
    Gini,
    /// `2sqrt(p(1-p))`.
    Sqrt,
}

impl ImpurityFn {
    pub fn eval(&self, p: f64) -> f64 {
        match self {
            ImpurityFn::Entropy => {
                if p <= 0.0 || p >= 1.0 {
                    0.0
                } else {
                    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
                }
            }
            ImpurityFn::Gini => 4.0 * p * (1.0 - p),
            ImpurityFn::Sqrt => 2.0 * (p * (1.0 - p)).sqrt(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplitCriterion {
    Influence,
    Correlation,
    Impurity(ImpurityFn),
}

impl fmt::Display for SplitCriterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            SplitCriterion::Influence => "influence",
            SplitCriterion::Correlation => "correlation",
            SplitCriterion::Impurity(ImpurityFn::Entropy) => "entropy",
            SplitCriterion::Impurity(ImpurityFn::Gini) => "gini",
            SplitCriterion::Impurity(ImpurityFn::Sqrt) => "sqrt",
        };
        f.write_str(name)
    }
}

impl std::str::FromStr for SplitCriterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "influence" => Ok(SplitCriterion::Influence),
            "correlation" => Ok(SplitCriterion::Correlation),
            "entropy" => Ok(SplitCriterion::Impurity(ImpurityFn::Entropy)),
            "gini" => Ok(SplitCriterion::Impurity(ImpurityFn::Gini)),
            "sqrt" => Ok(SplitCriterion::Impurity(ImpurityFn::Sqrt)),
            other => Err(Error::InvalidParams(format!("unknown criterion {other:?}"))),
        }
    }
}

/// Default leaf budget; exponential blowups terminate with reason `Budget`
/// instead of hanging.
pub const DEFAULT_SIZE_BUDGET: u64 = 1 << 22;

#[derive(Clone, Debug)]
pub struct BuildOptions {
    pub criterion: SplitCriterion,
    pub eps: Frac,
    pub size_budget: u64,
}

impl BuildOptions {
    pub fn new(criterion: SplitCriterion, eps: Frac) -> Result<Self> {
        if !eps.is_zero() && 2 * eps.num >= eps.den {
            return Err(Error::InvalidParams(format!(
                "eps {eps} must lie in [0, 1/2)"
            )));
        }
        Ok(BuildOptions {
            criterion,
            eps,
            size_budget: DEFAULT_SIZE_BUDGET,
        })
    }

    pub fn with_budget(mut self, budget: u64) -> Result<Self> {
        if budget == 0 {
            return Err(Error::InvalidParams(
                "size budget must be at least 1".into(),
            ));
        }
        self.size_budget = budget;
        Ok(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Termination {
    Accuracy,
    Budget,
}

/// One build iteration: which leaf was split with which variable, the
/// criterion value that won, and the exact accounting.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TraceStep {
    pub step: u64,
    /// Root-to-leaf branch bits of the split leaf.
    pub leaf_path: String,
    /// Original 1-indexed coordinate queried.
    pub var: usize,
    /// The winning criterion value scaled by the leaf's reach probability.
    pub criterion_score: f64,
    /// `2^{-|ℓ|}·Inf_var(f_ℓ)`: the exact cost decrement of this split.
    pub score: Dyadic,
    pub cost_before: Dyadic,
    pub cost_after: Dyadic,
    pub error_after: Dyadic,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BuildTrace {
    pub criterion: String,
    pub eps: Frac,
    pub initial_cost: Dyadic,
    pub initial_error: Dyadic,
    pub steps: Vec<TraceStep>,
    pub termination: Termination,
    pub final_error: Dyadic,
    pub final_size: u64,
}

/// The built tree together with its bare shape and full trace.
#[derive(Clone, Debug)]
pub struct BuildResult {
    pub tree: DecisionTree,
    pub bare: BareTree,
    pub trace: BuildTrace,
}

struct BestSplit {
    var_orig: usize,
    var_pos: usize,
    /// Criterion value, exact when the criterion admits it.
    exact: Option<Dyadic>,
    float: f64,
    /// `Inf_var(f_ℓ)`, the exact influence of the chosen variable.
    influence: Dyadic,
}

struct LeafState {
    fixed: Vec<(usize, bool)>,
    table: TruthTable,
    /// Original coordinates of the table's positions, ascending.
    live: Vec<usize>,
    depth: u32,
    total_influence: Dyadic,
    /// Contribution `2^{-|ℓ|}·error(f_ℓ, ±1)` to the completion error.
    err: Dyadic,
    label: i8,
    best: Option<BestSplit>,
}

const FLOAT_TIE_TOL: f64 = 1e-12;

fn analyze_leaf(
    table: TruthTable,
    live: Vec<usize>,
    fixed: Vec<(usize, bool)>,
    depth: u32,
    criterion: SplitCriterion,
) -> LeafState {
    let nt = table.n();
    let err = table.error_pm1().div_pow2(depth);
    let label = if table.mean().is_negative() { -1 } else { 1 };
    let mut best: Option<BestSplit> = None;
    let mut influence_counts = vec![0u64; nt];
    for (pos, count) in influence_counts.iter_mut().enumerate() {
        *count = table.influence_count(pos);
    }
    let total_influence = if nt == 0 {
        Dyadic::zero()
    } else {
        Dyadic::ratio(influence_counts.iter().sum::<u64>() as i64, (nt - 1) as u32)
    };
    let ones = table.ones();
    for pos in 0..nt {
        let influence = Dyadic::ratio(influence_counts[pos] as i64, (nt - 1) as u32);
        let (exact, float) = match criterion {
            SplitCriterion::Influence => (Some(influence.clone()), influence.to_f64()),
            SplitCriterion::Correlation => {
                let hi = table.ones_where_coord_set(pos) as i64;
                let corr = Dyadic::ratio(4 * hi - 2 * ones as i64, nt as u32);
                let f = corr.to_f64();
                (Some(corr), f)
            }
            SplitCriterion::Impurity(g) => {
                let points = table.num_points() as f64;
                let hi_ones = table.ones_where_coord_set(pos) as f64;
                let lo_ones = ones as f64 - hi_ones;
                let p = ones as f64 / points;
                let p0 = lo_ones / (points / 2.0);
                let p1 = hi_ones / (points / 2.0);
                let gain = g.eval(p) - 0.5 * (g.eval(p0) + g.eval(p1));
                (None, gain)
            }
        };
        let replace = match (&best, &exact) {
            (None, _) => true,
            (Some(b), Some(v)) => b.exact.as_ref().is_some_and(|be| v > be),
            (Some(b), None) => float > b.float + FLOAT_TIE_TOL,
        };
        if replace {
            best = Some(BestSplit {
                var_orig: live[pos],
                var_pos: pos + 1,
                exact,
                float,
                influence,
            });
        }
    }
    LeafState {
        fixed,
        table,
        live,
        depth,
        total_influence,
        err,
        label,
        best,
    }
}

impl LeafState {
    /// Reach-probability-scaled criterion value of this leaf's best split.
    fn score_exact(&self) -> Option<Dyadic> {
        self.best
            .as_ref()
            .and_then(|b| b.exact.as_ref())
            .map(|v| v.div_pow2(self.depth))
    }

    fn score_float(&self) -> Option<f64> {
        self.best
            .as_ref()
            .map(|b| b.float / 2f64.powi(self.depth as i32))
    }
}

/// `score(ℓ, i) = 2^{-|ℓ|}·Inf_i(f_ℓ)` for a leaf identified by its path
/// restriction.
pub fn score(f: &TruthTable, leaf: &Restriction, i: usize) -> Result<Dyadic> {
    if leaf.fixes(i).is_some() {
        return Err(Error::InvalidParams(format!(
            "coordinate {i} is already on the path"
        )));
    }
    leaf.validate(f.n())?;
    if i == 0 || i > f.n() {
        return Err(Error::CoordOutOfRange { coord: i, n: f.n() });
    }
    let sub = f.restrict(leaf)?;
    let pos = (1..=f.n())
        .filter(|c| leaf.fixes(*c).is_none())
        .position(|c| c == i)
        .expect("unfixed coordinate");
    Ok(sub.influence(pos + 1)?.div_pow2(leaf.len() as u32))
}

/// `H(T°) = Σ_leaves 2^{-|ℓ|}·G(Pr[f_ℓ = +1])`.
pub fn impurity_potential(bare: &BareTree, f: &TruthTable, g: ImpurityFn) -> Result<f64> {
    fn rec(
        bare: &BareTree,
        table: &TruthTable,
        live: &[usize],
        depth: u32,
        g: ImpurityFn,
    ) -> Result<f64> {
        match bare {
            BareTree::Leaf { .. } => {
                let p = table.ones() as f64 / table.num_points() as f64;
                Ok(g.eval(p) / 2f64.powi(depth as i32))
            }
            BareTree::Node { var, lo, hi } => {
                let pos = live
                    .iter()
                    .position(|c| c == var)
                    .ok_or(Error::CoordOutOfRange {
                        coord: *var,
                        n: live.len(),
                    })?;
                let sub: Vec<usize> = live.iter().copied().filter(|c| c != var).collect();
                let l = rec(lo, &table.restrict_one(pos + 1, false)?, &sub, depth + 1, g)?;
                let h = rec(hi, &table.restrict_one(pos + 1, true)?, &sub, depth + 1, g)?;
                Ok(l + h)
            }
        }
    }
    let live: Vec<usize> = (1..=f.n()).collect();
    rec(bare, f, &live, 0, g)
}

/// `G(p(f)) - (G(p(f_{x_i=0})) + G(p(f_{x_i=1})))/2` with `p = Pr[· = +1]`.
pub fn purity_gain(f: &TruthTable, i: usize, g: ImpurityFn) -> Result<f64> {
    if i == 0 || i > f.n() {
        return Err(Error::CoordOutOfRange { coord: i, n: f.n() });
    }
    let points = f.num_points() as f64;
    let ones = f.ones() as f64;
    let hi_ones = f.ones_where_coord_set(i - 1) as f64;
    let p = ones / points;
    let p0 = (ones - hi_ones) / (points / 2.0);
    let p1 = hi_ones / (points / 2.0);
    Ok(g.eval(p) - 0.5 * (g.eval(p0) + g.eval(p1)))
}

/// Runs the top-down loop on `f`. The loop splits while the completion error
/// is at least `eps` (and nonzero); a function whose completion is already
/// accurate returns a single leaf without any split.
pub fn build_top_down(f: &TruthTable, opts: &BuildOptions) -> Result<BuildResult> {
    if f.n() == 0 {
        return Err(Error::InvalidParams(
            "cannot build over zero variables".into(),
        ));
    }
    let root = analyze_leaf(
        f.clone(),
        (1..=f.n()).collect(),
        Vec::new(),
        0,
        opts.criterion,
    );
    let initial_cost = root.total_influence.clone();
    let initial_error = root.err.clone();
    let mut error = initial_error.clone();
    let mut cost = initial_cost.clone();
    let mut leaves: BTreeMap<Vec<u8>, LeafState> = BTreeMap::new();
    leaves.insert(Vec::new(), root);
    let mut splits: BTreeMap<Vec<u8>, usize> = BTreeMap::new();
    let mut steps = Vec::new();
    let termination = loop {
        if error.is_zero() || opts.eps.greater_than(&error) {
            break Termination::Accuracy;
        }
        if leaves.len() as u64 >= opts.size_budget {
            break Termination::Budget;
        }
        let path = select_leaf(&leaves, opts.criterion)
            .ok_or_else(|| Error::InvalidParams("no splittable leaf left".into()))?;
        let leaf = leaves.remove(&path).expect("selected leaf exists");
        let best = leaf.best.as_ref().expect("selected leaf is splittable");
        let var = best.var_orig;
        let split_score = best.influence.div_pow2(leaf.depth);
        let criterion_score = leaf.score_float().expect("splittable");
        let cost_before = cost.clone();

        let sub_live: Vec<usize> = leaf.live.iter().copied().filter(|&c| c != var).collect();
        let mut children = Vec::with_capacity(2);
        for bit in [false, true] {
            let table = leaf.table.restrict_one(best.var_pos, bit)?;
            let mut fixed = leaf.fixed.clone();
            fixed.push((var, bit));
            children.push(analyze_leaf(
                table,
                sub_live.clone(),
                fixed,
                leaf.depth + 1,
                opts.criterion,
            ));
        }

        cost = &cost - &leaf.total_influence.div_pow2(leaf.depth);
        error = &error - &leaf.err;
        for child in &children {
            cost = &cost + &child.total_influence.div_pow2(child.depth);
            error = &error + &child.err;
        }

        steps.push(TraceStep {
            step: steps.len() as u64,
            leaf_path: path_string(&path),
            var,
            criterion_score,
            score: split_score,
            cost_before,
            cost_after: cost.clone(),
            error_after: error.clone(),
        });

        splits.insert(path.clone(), var);
        let mut hi_path = path.clone();
        let mut lo_path = path;
        lo_path.push(0);
        hi_path.push(1);
        let mut it = children.into_iter();
        leaves.insert(lo_path, it.next().expect("two children"));
        leaves.insert(hi_path, it.next().expect("two children"));
    };

    let tree = rebuild_tree(&splits, &leaves, Vec::new());
    let bare = rebuild_bare(&splits, &leaves, Vec::new());
    let trace = BuildTrace {
        criterion: opts.criterion.to_string(),
        eps: opts.eps,
        initial_cost,
        initial_error,
        steps,
        termination,
        final_error: error,
        final_size: tree.size(),
    };
    Ok(BuildResult { tree, bare, trace })
}

fn path_string(path: &[u8]) -> String {
    path.iter()
        .map(|b| if *b == 1 { '1' } else { '0' })
        .collect()
}

/// Picks the highest-scoring splittable leaf; leaf ties go to the leftmost
/// path. Exact criteria compare dyadics; impurity compares floats with the
/// 1e-12 tie window. Iterating in path order makes first-seen win ties.
fn select_leaf(
    leaves: &BTreeMap<Vec<u8>, LeafState>,
    criterion: SplitCriterion,
) -> Option<Vec<u8>> {
    match criterion {
        SplitCriterion::Influence | SplitCriterion::Correlation => {
            let mut best: Option<(&Vec<u8>, Dyadic)> = None;
            for (path, leaf) in leaves {
                let Some(s) = leaf.score_exact() else {
                    continue;
                };
                match &best {
                    Some((_, bs)) if s <= *bs => {}
                    _ => best = Some((path, s)),
                }
            }
            best.map(|(p, _)| p.clone())
        }
        SplitCriterion::Impurity(_) => {
            let mut best: Option<(&Vec<u8>, f64)> = None;
            for (path, leaf) in leaves {
                let Some(s) = leaf.score_float() else {
                    continue;
                };
                match best {
                    Some((_, bs)) if s <= bs + FLOAT_TIE_TOL => {}
                    _ => best = Some((path, s)),
                }
            }
            best.map(|(p, _)| p.clone())
        }
    }
}

fn rebuild_tree(
    splits: &BTreeMap<Vec<u8>, usize>,
    leaves: &BTreeMap<Vec<u8>, LeafState>,
    path: Vec<u8>,
) -> DecisionTree {
    if let Some(&var) = splits.get(&path) {
        let mut lo = path.clone();
        let mut hi = path;
        lo.push(0);
        hi.push(1);
        DecisionTree::Node {
            var,
            lo: Box::new(rebuild_tree(splits, leaves, lo)),
            hi: Box::new(rebuild_tree(splits, leaves, hi)),
        }
    } else {
        DecisionTree::Leaf(leaves[&path].label)
    }
}

fn rebuild_bare(
    splits: &BTreeMap<Vec<u8>, usize>,
    leaves: &BTreeMap<Vec<u8>, LeafState>,
    path: Vec<u8>,
) -> BareTree {
    if let Some(&var) = splits.get(&path) {
        let mut lo = path.clone();
        let mut hi = path;
        lo.push(0);
        hi.push(1);
        BareTree::Node {
            var,
            lo: Box::new(rebuild_bare(splits, leaves, lo)),
            hi: Box::new(rebuild_bare(splits, leaves, hi)),
        }
    } else {
        let fixed = leaves[&path].fixed.clone();
        BareTree::Leaf {
            path: Restriction::new(fixed).expect("paths never repeat variables"),
        }
    }
}

/// True when `shorter`'s step sequence is an exact prefix of `longer`'s.
pub fn trace_is_prefix(shorter: &BuildTrace, longer: &BuildTrace) -> bool {
    shorter.steps.len() <= longer.steps.len()
        && shorter
            .steps
            .iter()
            .zip(&longer.steps)
            .all(|(a, b)| a.leaf_path == b.leaf_path && a.var == b.var)
}

/// Writes a trace as JSON lines, one record per iteration.
pub fn write_trace_jsonl(mut w: impl Write, trace: &BuildTrace) -> Result<()> {
    for step in &trace.steps {
        let line = serde_json::to_string(step).map_err(|e| Error::Parse {
            at: "trace".into(),
            msg: e.to_string(),
        })?;
        writeln!(w, "{line}")?;
    }
    Ok(())
}

/// Per-step verdicts for the additive and multiplicative score bounds.
#[derive(Clone, Debug, Serialize)]
pub struct StepBound {
    pub step: u64,
    pub score: f64,
    pub additive_rhs: f64,
    pub additive_pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub multiplicative_rhs: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub multiplicative_pass: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub steps: Vec<StepBound>,
    pub all_pass: bool,
}

/// Irrational bound comparisons run in double precision with this one-sided
/// slack.
pub const BOUND_SLACK: f64 = 1e-9;

/// Checks, for every pre-termination step `j` of an influence-criterion
/// trace with size bound `s ≥ optimal_size(f)`:
/// `score_j ≥ ε/((j+1)·log2 s)`, and when `cost_j ≥ ε·log2(4s/ε)` also
/// `score_j ≥ cost_j/((j+1)·log2(4s/ε)·log2 s)`. Failures are reported, not
/// raised.
pub fn assert_score_bounds(trace: &BuildTrace, s: u64, eps: Frac) -> BoundReport {
    let eps_f = eps.to_f64();
    let log_s = (s as f64).log2();
    let mut all_pass = true;
    let mut steps = Vec::with_capacity(trace.steps.len());
    for st in &trace.steps {
        let j = st.step as f64;
        let score = st.score.to_f64();
        let additive_rhs = if s <= 1 {
            0.0
        } else {
            eps_f / ((j + 1.0) * log_s)
        };
        let additive_pass = score + BOUND_SLACK >= additive_rhs;
        let (multiplicative_rhs, multiplicative_pass) = if eps.is_zero() || s <= 1 {
            (None, None)
        } else {
            let log_4s_eps = (4.0 * s as f64 / eps_f).log2();
            let cost_j = st.cost_before.to_f64();
            if cost_j >= eps_f * log_4s_eps {
                let rhs = cost_j / ((j + 1.0) * log_4s_eps * log_s);
                (Some(rhs), Some(score + BOUND_SLACK >= rhs))
            } else {
                (None, None)
            }
        };
        all_pass &= additive_pass && multiplicative_pass.unwrap_or(true);
        steps.push(StepBound {
            step: st.step,
            score,
            additive_rhs,
            additive_pass,
            multiplicative_rhs,
            multiplicative_pass,
        });
    }
    BoundReport { steps, all_pass }
}

/// Number of nodes that query a z-coordinate with no z-coordinate above
/// them.
pub fn count_z_gateway_nodes(tree: &DecisionTree, layout: &Layout) -> u64 {
    let z = layout.z_coords();
    fn rec(t: &DecisionTree, z: &[usize], above_z: bool) -> u64 {
        match t {
            DecisionTree::Leaf(_) => 0,
            DecisionTree::Node { var, lo, hi } => {
                let is_z = z.contains(var);
                let gateway = (is_z && !above_z) as u64;
                let below = above_z || is_z;
                gateway + rec(lo, z, below) + rec(hi, z, below)
            }
        }
    }
    rec(tree, &z, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolfn::{family_exact_nonmonotone, parity, Layout, LayoutBlock};
    use crate::dtree;

    fn build(f: &TruthTable, criterion: SplitCriterion, eps: Frac) -> BuildResult {
        build_top_down(f, &BuildOptions::new(criterion, eps).unwrap()).unwrap()
    }

    fn parity_embedded(n: usize, a: usize, b: usize) -> TruthTable {
        TruthTable::from_fn(n, |x| ((x >> (a - 1)) ^ (x >> (b - 1))) & 1 == 1).unwrap()
    }

    #[test]
    fn score_examples() {
        let par2 = parity(2).unwrap();
        assert_eq!(
            score(&par2, &Restriction::empty(), 1).unwrap(),
            Dyadic::one()
        );

        // Depth-2 leaf over a constant subfunction scores 0.
        let and3 = TruthTable::from_fn(3, |x| x == 7).unwrap();
        let leaf = Restriction::new(vec![(1, false), (2, true)]).unwrap();
        assert!(score(&and3, &leaf, 3).unwrap().is_zero());

        let (f, layout) = family_exact_nonmonotone(1).unwrap();
        let y = layout.block("y", Some(1), None).unwrap().coords[0];
        assert_eq!(
            score(&f, &Restriction::empty(), y).unwrap(),
            Dyadic::ratio(3, 2)
        );

        // A coordinate already on the path is rejected.
        assert!(score(&par2, &Restriction::new(vec![(1, true)]).unwrap(), 1).is_err());
    }

    #[test]
    fn influence_builds_optimal_parity_tree() {
        // Parity of x_3, x_4 inside n = 4: only those two are queried.
        let f = parity_embedded(4, 3, 4);
        let r = build(&f, SplitCriterion::Influence, Frac::zero());
        assert_eq!(r.tree.size(), 4);
        assert_eq!(r.tree.depth(), 2);
        assert!(r.trace.final_error.is_zero());
        let queried: std::collections::BTreeSet<usize> =
            r.trace.steps.iter().map(|s| s.var).collect();
        assert_eq!(queried.into_iter().collect::<Vec<_>>(), vec![3, 4]);
        assert!(dtree::to_truth_table(&r.tree, 4)
            .unwrap()
            .error(&f)
            .unwrap()
            .is_zero());
    }

    #[test]
    fn correlation_blows_up_on_parity() {
        // All correlations are 0 at the start, so lexicographic ties make
        // the builder query x_1 and x_2 before separating.
        let f = parity_embedded(4, 3, 4);
        let r = build(&f, SplitCriterion::Correlation, Frac::zero());
        assert!(r.tree.size() > 4, "size {}", r.tree.size());
        assert_eq!(r.trace.steps[0].var, 1);
        assert!(r.trace.final_error.is_zero());
    }

    #[test]
    fn parity_at_quarter_eps_builds_full_tree() {
        // At eps = 1/4 the loop still refines the last mixed leaf (the
        // completion error equals eps after three leaves), ending at the
        // optimal size-4 tree.
        let f = parity_embedded(6, 5, 6);
        let r = build(&f, SplitCriterion::Influence, Frac::new(1, 4).unwrap());
        assert_eq!(r.tree.size(), 4);
        assert_eq!(r.trace.termination, Termination::Accuracy);
        assert!(r.trace.final_error.is_zero());
    }

    #[test]
    fn termination_checks_error_first() {
        // A function already closer than eps to a constant returns a single
        // leaf with no splits.
        let f = TruthTable::from_fn(4, |x| x != 0).unwrap(); // Pr[f=-1] = 1/16
        let r = build(&f, SplitCriterion::Influence, Frac::new(1, 4).unwrap());
        assert_eq!(r.tree, DecisionTree::Leaf(1));
        assert!(r.trace.steps.is_empty());
    }

    #[test]
    fn budget_termination_reported() {
        let f = parity_embedded(4, 3, 4);
        let opts = BuildOptions::new(SplitCriterion::Influence, Frac::zero())
            .unwrap()
            .with_budget(2)
            .unwrap();
        let r = build_top_down(&f, &opts).unwrap();
        assert_eq!(r.trace.termination, Termination::Budget);
        assert_eq!(r.tree.size(), 2);
    }

    #[test]
    fn nonmonotone_family_sizes_follow_recurrence() {
        let mut prev = 0u64;
        for h in 0..=4 {
            let (f, _) = family_exact_nonmonotone(h).unwrap();
            let r = build(&f, SplitCriterion::Influence, Frac::zero());
            let expected = if h == 0 { 2 } else { 2 * prev + 4 };
            assert_eq!(r.tree.size(), expected, "h={h}");
            prev = r.tree.size();
            assert!(r.trace.final_error.is_zero());
        }
    }

    #[test]
    fn cost_telescopes_exactly() {
        let (f, _) = family_exact_nonmonotone(2).unwrap();
        let r = build(&f, SplitCriterion::Influence, Frac::zero());
        let mut cost = r.trace.initial_cost.clone();
        assert_eq!(cost, f.total_influence());
        for step in &r.trace.steps {
            assert_eq!(step.cost_before, cost);
            let expected = &cost - &step.score;
            assert_eq!(step.cost_after, expected, "step {}", step.step);
            cost = expected;
        }
        assert_eq!(r.trace.final_size, r.tree.size());
    }

    #[test]
    fn impurity_gain_examples() {
        // Constant: potential 0.
        let c = TruthTable::constant(3, 1).unwrap();
        let h = impurity_potential(&BareTree::single_leaf(), &c, ImpurityFn::Gini).unwrap();
        assert_eq!(h, 0.0);

        // Parity: zero purity gain for every variable and impurity function.
        let par = parity(2).unwrap();
        for g in [ImpurityFn::Entropy, ImpurityFn::Gini, ImpurityFn::Sqrt] {
            for i in 1..=2 {
                assert_eq!(purity_gain(&par, i, g).unwrap(), 0.0);
            }
        }

        // AND_2 under Gini: G(1/4) - (G(0) + G(1/2))/2 = 3/4 - 1/2 = 1/4.
        let and2 = TruthTable::from_fn(2, |x| x == 3).unwrap();
        let gain = purity_gain(&and2, 1, ImpurityFn::Gini).unwrap();
        assert!((gain - 0.25).abs() < 1e-15);
    }

    #[test]
    fn impurity_criteria_exceed_size_four_on_parity() {
        let f = parity_embedded(6, 5, 6);
        for g in [ImpurityFn::Entropy, ImpurityFn::Gini, ImpurityFn::Sqrt] {
            let r = build(&f, SplitCriterion::Impurity(g), Frac::new(1, 4).unwrap());
            assert!(r.tree.size() > 4, "{g:?} built {}", r.tree.size());
        }
    }

    #[test]
    fn score_bound_examples() {
        // Exact build: additive bound has RHS 0 and always passes.
        let (f, _) = family_exact_nonmonotone(1).unwrap();
        let r = build(&f, SplitCriterion::Influence, Frac::zero());
        let report = assert_score_bounds(&r.trace, 8, Frac::zero());
        assert!(report.all_pass);
        assert!(report.steps.iter().all(|s| s.additive_rhs == 0.0));

        // parity(2), eps = 1/4, s = 4: step 0 score 1 >= 1/8.
        let par = parity(2).unwrap();
        let r = build(&par, SplitCriterion::Influence, Frac::new(1, 4).unwrap());
        let report = assert_score_bounds(&r.trace, 4, Frac::new(1, 4).unwrap());
        assert!(report.all_pass);
        assert_eq!(report.steps[0].score, 1.0);
        assert!((report.steps[0].additive_rhs - 0.125).abs() < 1e-15);
    }

    #[test]
    fn early_stop_trace_is_prefix() {
        for seed in 0..20 {
            let f = crate::boolfn::random_tree_function(8, 12, seed).unwrap();
            let coarse = build(&f, SplitCriterion::Influence, Frac::new(1, 4).unwrap());
            let fine = build(&f, SplitCriterion::Influence, Frac::new(1, 8).unwrap());
            assert!(trace_is_prefix(&coarse.trace, &fine.trace), "seed={seed}");
            assert!(
                dtree::is_pruning_of(&coarse.bare, &fine.bare),
                "seed={seed}"
            );
        }
    }

    #[test]
    fn accuracy_termination_meets_eps() {
        for seed in 0..20 {
            let f = crate::boolfn::random_tree_function(7, 10, 1000 + seed).unwrap();
            let eps = Frac::new(1, 8).unwrap();
            let r = build(&f, SplitCriterion::Influence, eps);
            assert_eq!(r.trace.termination, Termination::Accuracy);
            // error <= eps (in fact < eps or exactly zero by the loop rule).
            assert!(
                r.trace.final_error.cmp_ratio(1, 8) != std::cmp::Ordering::Greater,
                "seed={seed}"
            );
            // The reported error matches an independent recomputation.
            let err = dtree::to_truth_table(&r.tree, 7)
                .unwrap()
                .error(&f)
                .unwrap();
            assert_eq!(err, r.trace.final_error);
        }
    }

    #[test]
    fn impurity_functions_have_required_shape() {
        // G(0) = G(1) = 0, G(1/2) = 1, symmetry, and midpoint concavity on
        // a grid.
        for g in [ImpurityFn::Entropy, ImpurityFn::Gini, ImpurityFn::Sqrt] {
            assert_eq!(g.eval(0.0), 0.0);
            assert_eq!(g.eval(1.0), 0.0);
            assert!((g.eval(0.5) - 1.0).abs() < 1e-15);
            for i in 0..=64 {
                let p = i as f64 / 64.0;
                assert!(
                    (g.eval(p) - g.eval(1.0 - p)).abs() < 1e-12,
                    "{g:?} symmetry at {p}"
                );
            }
            for i in 1..64 {
                for j in (i + 1)..=64 {
                    let (a, b) = (i as f64 / 64.0, j as f64 / 64.0);
                    let mid = g.eval((a + b) / 2.0);
                    assert!(
                        mid + 1e-12 >= (g.eval(a) + g.eval(b)) / 2.0,
                        "{g:?} concavity at ({a}, {b})"
                    );
                }
            }
        }
    }

    #[test]
    fn gateway_node_counting() {
        let layout = Layout {
            n: 3,
            blocks: vec![LayoutBlock {
                name: "z".into(),
                level: None,
                part: None,
                coords: vec![3],
            }],
        };
        let no_z = DecisionTree::Node {
            var: 1,
            lo: Box::new(DecisionTree::Leaf(1)),
            hi: Box::new(DecisionTree::Leaf(-1)),
        };
        assert_eq!(count_z_gateway_nodes(&no_z, &layout), 0);
        let root_z = DecisionTree::Node {
            var: 3,
            lo: Box::new(no_z.clone()),
            hi: Box::new(DecisionTree::Leaf(1)),
        };
        assert_eq!(count_z_gateway_nodes(&root_z, &layout), 1);
    }
}
