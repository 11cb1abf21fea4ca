//! Sampling oracles and score-estimation learners.
//!
//! Two estimators drive the learning loop: a correlation-based score
//! estimate from plain labeled examples (sound for monotone targets) and an
//! edge-disagreement estimate from random edge samples (sound for every
//! target). Both are unbiased for `score(ℓ, i) = 2^{-|ℓ|}·Inf_i(f_ℓ)` on
//! their respective domains.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::boolfn::{Restriction, TruthTable};
use crate::dtree::DecisionTree;
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::frac::Frac;

/// Labeled uniform-random points; every label equals `target(x)`.
#[derive(Clone, Debug)]
pub struct ExampleSample {
    pub n: usize,
    pub examples: Vec<(u32, i8)>,
    pub seed: u64,
    pub target: String,
}

/// One labeled random edge: `x` paired with `x` flipped at `coord`.
#[derive(Clone, Copy, Debug)]
pub struct Edge {
    pub x: u32,
    pub coord: usize,
    pub label_x: i8,
    pub label_flip: i8,
}

/// Labeled random edges with a per-coordinate partitioned view.
#[derive(Clone, Debug)]
pub struct EdgeSample {
    pub n: usize,
    pub edges: Vec<Edge>,
    pub seed: u64,
    pub target: String,
    /// Indices of `edges` grouped by flipped coordinate (`E_i`).
    buckets: Vec<Vec<u32>>,
}

impl EdgeSample {
    pub fn bucket(&self, coord: usize) -> &[u32] {
        &self.buckets[coord - 1]
    }
}

/// `m` i.i.d. uniform draws, labeled by `f`; deterministic in the seed.
pub fn draw_examples(f: &TruthTable, m: usize, seed: u64) -> ExampleSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mask = (f.num_points() - 1) as u32;
    let examples = (0..m)
        .map(|_| {
            let x = rng.gen::<u32>() & mask;
            (x, f.evaluate(x))
        })
        .collect();
    ExampleSample {
        n: f.n(),
        examples,
        seed,
        target: format!("{f:?}"),
    }
}

/// The complete support, each point once: the empirical mean equals the
/// expectation exactly.
pub fn full_support(f: &TruthTable) -> ExampleSample {
    let examples = (0..f.num_points() as u32)
        .map(|x| (x, f.evaluate(x)))
        .collect();
    ExampleSample {
        n: f.n(),
        examples,
        seed: 0,
        target: format!("{f:?}"),
    }
}

/// `m` random edges: both `x` and the flipped coordinate uniform.
pub fn draw_edges(f: &TruthTable, m: usize, seed: u64) -> EdgeSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mask = (f.num_points() - 1) as u32;
    let mut edges = Vec::with_capacity(m);
    let mut buckets = vec![Vec::new(); f.n()];
    for idx in 0..m {
        let x = rng.gen::<u32>() & mask;
        let coord = rng.gen_range(1..=f.n());
        let flipped = x ^ (1 << (coord - 1));
        edges.push(Edge {
            x,
            coord,
            label_x: f.evaluate(x),
            label_flip: f.evaluate(flipped),
        });
        buckets[coord - 1].push(idx as u32);
    }
    EdgeSample {
        n: f.n(),
        edges,
        seed,
        target: format!("{f:?}"),
        buckets,
    }
}

/// The complete edge set in direction `coord`: all `2^{n-1}` edges once.
pub fn complete_edges(f: &TruthTable, coord: usize) -> EdgeSample {
    let mut edges = Vec::new();
    let mut buckets = vec![Vec::new(); f.n()];
    for x in 0..f.num_points() as u32 {
        if (x >> (coord - 1)) & 1 == 0 {
            let flipped = x ^ (1 << (coord - 1));
            buckets[coord - 1].push(edges.len() as u32);
            edges.push(Edge {
                x,
                coord,
                label_x: f.evaluate(x),
                label_flip: f.evaluate(flipped),
            });
        }
    }
    EdgeSample {
        n: f.n(),
        edges,
        seed: 0,
        target: format!("{f:?}"),
        buckets,
    }
}

/// Empirical mean of `1[x reaches ℓ]·f(x)·(2x_i - 1)` over the sample;
/// unbiased for `score(ℓ, i)` when the target is monotone. Empty samples
/// estimate 0.
pub fn estimate_score_monotone(s: &ExampleSample, leaf: &Restriction, i: usize) -> f64 {
    if s.examples.is_empty() {
        return 0.0;
    }
    let mut sum = 0i64;
    for &(x, y) in &s.examples {
        if leaf.matches(x) {
            let sign = if (x >> (i - 1)) & 1 == 1 { 1 } else { -1 };
            sum += (y as i64) * sign;
        }
    }
    sum as f64 / s.examples.len() as f64
}

/// Empirical mean over `E_i` of `1[both endpoints reach ℓ]·1[labels
/// differ]`; unbiased for `score(ℓ, i)` when `i` is off the path. `None`
/// flags an empty `E_i` (insufficient edges).
pub fn estimate_score_edges(e: &EdgeSample, leaf: &Restriction, i: usize) -> Option<f64> {
    let bucket = e.bucket(i);
    if bucket.is_empty() {
        return None;
    }
    let mut hits = 0u64;
    for &idx in bucket {
        let edge = e.edges[idx as usize];
        // Both endpoints reach the leaf iff x does and i is unfixed.
        if leaf.fixes(i).is_none() && leaf.matches(edge.x) && edge.label_x != edge.label_flip {
            hits += 1;
        }
    }
    Some(hits as f64 / bucket.len() as f64)
}

/// `⌈12·(k·log2(s)/ε)·(log2 k + log2(1/δ))⌉`, at least 1: enough examples
/// for the empirical argmax to have true score within a factor 4 of the
/// maximum at every one of `k` steps, with probability `1 - δ`.
pub fn sample_size_monotone(k: u64, s: u64, eps: f64, delta: f64) -> u64 {
    let m =
        12.0 * (k as f64 * (s as f64).log2() / eps) * ((k as f64).log2() + (1.0 / delta).log2());
    (m.ceil() as u64).max(1)
}

/// `⌈4·n·(m + ln(1/δ))⌉`: enough random edges for every direction bucket to
/// hold at least `m` edges with probability `1 - δ`.
pub fn edge_sample_size(n: usize, m: u64, delta: f64) -> u64 {
    let v = 4.0 * n as f64 * (m as f64 + (1.0 / delta).ln());
    (v.ceil() as u64).max(1)
}

/// Validation-sample size for the held-out stopping rule.
fn validation_size(k: u64, eps: f64, delta: f64) -> u64 {
    let v = 32.0 / (eps * eps) * (4.0 * k as f64 / delta).ln();
    (v.ceil() as u64).max(1)
}

#[derive(Clone, Copy, Debug)]
pub struct LearnerConfig {
    /// Size bound on the target.
    pub s: u64,
    pub eps: Frac,
    pub delta: Frac,
    /// Split budget. Targets known only through an average-depth bound use
    /// the same code path with `k` derived from that bound instead of `s`;
    /// there is no separate algorithm.
    pub k: u64,
    pub seed: u64,
}

impl LearnerConfig {
    fn validate(&self) -> Result<()> {
        let e = self.eps.to_f64();
        let d = self.delta.to_f64();
        if !(e > 0.0 && e < 0.5) {
            return Err(Error::InvalidParams(format!(
                "eps {} must lie in (0, 1/2)",
                self.eps
            )));
        }
        if !(d > 0.0 && d < 1.0) {
            return Err(Error::InvalidParams(format!(
                "delta {} must lie in (0,1)",
                self.delta
            )));
        }
        if self.k == 0 || self.s == 0 {
            return Err(Error::InvalidParams("k and s must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LearnReport {
    pub mode: String,
    pub steps: u64,
    pub train_samples: u64,
    pub validation_samples: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edge_samples: Option<u64>,
    pub budget_exhausted: bool,
    pub validation_error: f64,
    /// Exact disagreement with the target, available at desk scale.
    pub true_error: f64,
    /// Every step's empirically chosen pair had true score at least a
    /// quarter of the step's true maximum.
    pub quarter_score_ok: bool,
    pub insufficient_edges: bool,
}

enum Scorer<'a> {
    Monotone(&'a ExampleSample),
    /// Edge sample plus the global `|E_i|` bucket sizes (the estimator's
    /// denominators).
    Edges(&'a EdgeSample, Vec<u64>),
}

struct LearnLeaf {
    fixed: Vec<(usize, bool)>,
    path: Restriction,
    /// Indices into the training sample reaching this leaf.
    idx: Vec<u32>,
    /// Edge-sample indices whose endpoints both reach this leaf.
    edge_idx: Vec<u32>,
    label: i8,
    /// Cached best (variable, empirical score) over unfixed variables.
    best: Option<(usize, f64)>,
}

impl LearnLeaf {
    fn relabel(&mut self, train: &ExampleSample) {
        let sum: i64 = self
            .idx
            .iter()
            .map(|&i| train.examples[i as usize].1 as i64)
            .sum();
        self.label = if sum < 0 { -1 } else { 1 };
    }

    /// Recomputes the cached best split from this leaf's own partitions;
    /// variable ties keep the lowest index. Scores sum only over the leaf's
    /// points but divide by the global sample size, matching the estimator
    /// definitions.
    fn rescore(&mut self, n: usize, scorer: &Scorer<'_>, insufficient: &mut bool) {
        let mut best: Option<(usize, f64)> = None;
        match scorer {
            Scorer::Monotone(train) => {
                let m = train.examples.len().max(1) as f64;
                let mut sums = vec![0i64; n];
                for &i in &self.idx {
                    let (x, y) = train.examples[i as usize];
                    for (pos, sum) in sums.iter_mut().enumerate() {
                        let sign = ((x >> pos) & 1) as i64 * 2 - 1;
                        *sum += y as i64 * sign;
                    }
                }
                for i in 1..=n {
                    if self.path.fixes(i).is_some() {
                        continue;
                    }
                    let est = sums[i - 1] as f64 / m;
                    if best.is_none_or(|(_, b)| est > b) {
                        best = Some((i, est));
                    }
                }
            }
            Scorer::Edges(edges, bucket_sizes) => {
                let mut hits = vec![0u64; n];
                for &i in &self.edge_idx {
                    let e = edges.edges[i as usize];
                    if e.label_x != e.label_flip {
                        hits[e.coord - 1] += 1;
                    }
                }
                for i in 1..=n {
                    if self.path.fixes(i).is_some() {
                        continue;
                    }
                    let denom = bucket_sizes[i - 1];
                    if denom == 0 {
                        *insufficient = true;
                        continue;
                    }
                    let est = hits[i - 1] as f64 / denom as f64;
                    if best.is_none_or(|(_, b)| est > b) {
                        best = Some((i, est));
                    }
                }
            }
        }
        self.best = best;
    }
}

fn eval_partition(
    splits: &BTreeMap<Vec<u8>, usize>,
    leaves: &BTreeMap<Vec<u8>, LearnLeaf>,
    x: u32,
) -> i8 {
    let mut path = Vec::new();
    loop {
        match splits.get(&path) {
            Some(&var) => path.push(((x >> (var - 1)) & 1) as u8),
            None => return leaves[&path].label,
        }
    }
}

/// The shared greedy loop: split the empirically best (leaf, variable) pair
/// until the held-out error drops to `eps/2` or the step budget runs out.
fn learn_loop(
    f: &TruthTable,
    cfg: &LearnerConfig,
    scorer: Scorer<'_>,
    train: &ExampleSample,
    validation: &ExampleSample,
    mode: &str,
    edge_samples: Option<u64>,
) -> Result<(DecisionTree, LearnReport)> {
    let n = f.n();
    let eps = cfg.eps.to_f64();
    let mut insufficient_edges = false;
    let mut root = LearnLeaf {
        fixed: Vec::new(),
        path: Restriction::empty(),
        idx: (0..train.examples.len() as u32).collect(),
        edge_idx: match &scorer {
            Scorer::Monotone(_) => Vec::new(),
            Scorer::Edges(e, _) => (0..e.edges.len() as u32).collect(),
        },
        label: 1,
        best: None,
    };
    root.rescore(n, &scorer, &mut insufficient_edges);
    let mut leaves: BTreeMap<Vec<u8>, LearnLeaf> = BTreeMap::new();
    leaves.insert(Vec::new(), root);
    let mut splits: BTreeMap<Vec<u8>, usize> = BTreeMap::new();
    let mut steps = 0u64;
    let mut budget_exhausted = false;
    let mut quarter_score_ok = true;
    let mut validation_error;
    loop {
        for leaf in leaves.values_mut() {
            leaf.relabel(train);
        }
        let val_miss = validation
            .examples
            .iter()
            .filter(|&&(x, y)| eval_partition(&splits, &leaves, x) != y)
            .count();
        validation_error = val_miss as f64 / validation.examples.len().max(1) as f64;
        if validation_error <= eps / 2.0 {
            break;
        }
        if steps >= cfg.k {
            budget_exhausted = true;
            break;
        }
        // Empirical argmax over (leaf, variable) from the cached per-leaf
        // bests; path order makes first-seen win leaf ties.
        let mut best: Option<(Vec<u8>, usize, f64)> = None;
        for (path, leaf) in &leaves {
            let Some((var, est)) = leaf.best else {
                continue;
            };
            match &best {
                Some((_, _, b)) if est <= *b => {}
                _ => best = Some((path.clone(), var, est)),
            }
        }
        let Some((path, var, _)) = best else {
            budget_exhausted = true;
            break;
        };
        if !quarter_check(f, &leaves[&path].path, var, &leaves) {
            quarter_score_ok = false;
        }
        let leaf = leaves.remove(&path).expect("selected leaf exists");
        let (mut lo_idx, mut hi_idx) = (Vec::new(), Vec::new());
        for &i in &leaf.idx {
            if (train.examples[i as usize].0 >> (var - 1)) & 1 == 1 {
                hi_idx.push(i);
            } else {
                lo_idx.push(i);
            }
        }
        // Edges flipping the split coordinate have their endpoints separated
        // and can never again reach a common leaf; drop them.
        let (mut lo_edges, mut hi_edges) = (Vec::new(), Vec::new());
        if let Scorer::Edges(e, _) = &scorer {
            for &i in &leaf.edge_idx {
                let edge = e.edges[i as usize];
                if edge.coord == var {
                    continue;
                }
                if (edge.x >> (var - 1)) & 1 == 1 {
                    hi_edges.push(i);
                } else {
                    lo_edges.push(i);
                }
            }
        }
        for (bit, idx, edge_idx) in [(false, lo_idx, lo_edges), (true, hi_idx, hi_edges)] {
            let mut fixed = leaf.fixed.clone();
            fixed.push((var, bit));
            let path_r = Restriction::new(fixed.clone()).expect("no repeats");
            let mut child_path = path.clone();
            child_path.push(bit as u8);
            let mut child = LearnLeaf {
                fixed,
                path: path_r,
                idx,
                edge_idx,
                label: 1,
                best: None,
            };
            child.rescore(n, &scorer, &mut insufficient_edges);
            leaves.insert(child_path, child);
        }
        splits.insert(path, var);
        steps += 1;
    }

    let tree = rebuild(&splits, &leaves, Vec::new());
    let tree_tt = crate::dtree::to_truth_table(&tree, n)?;
    let report = LearnReport {
        mode: mode.into(),
        steps,
        train_samples: train.examples.len() as u64,
        validation_samples: validation.examples.len() as u64,
        edge_samples,
        budget_exhausted,
        validation_error,
        true_error: tree_tt.error(f)?.to_f64(),
        quarter_score_ok,
        insufficient_edges,
    };
    Ok((tree, report))
}

/// True when the chosen pair's exact score is at least a quarter of the
/// exact maximum over all current (leaf, variable) pairs.
fn quarter_check(
    f: &TruthTable,
    chosen_leaf: &Restriction,
    chosen_var: usize,
    leaves: &BTreeMap<Vec<u8>, LearnLeaf>,
) -> bool {
    let chosen = crate::topdown::score(f, chosen_leaf, chosen_var).expect("valid pair");
    let mut max = Dyadic::zero();
    for leaf in leaves.values() {
        for i in 1..=f.n() {
            if leaf.path.fixes(i).is_none() {
                let s = crate::topdown::score(f, &leaf.path, i).expect("valid pair");
                if s > max {
                    max = s;
                }
            }
        }
    }
    &chosen * &Dyadic::from_int(4) >= max
}

fn rebuild(
    splits: &BTreeMap<Vec<u8>, usize>,
    leaves: &BTreeMap<Vec<u8>, LearnLeaf>,
    path: Vec<u8>,
) -> DecisionTree {
    if let Some(&var) = splits.get(&path) {
        let mut lo = path.clone();
        let mut hi = path;
        lo.push(0);
        hi.push(1);
        DecisionTree::Node {
            var,
            lo: Box::new(rebuild(splits, leaves, lo)),
            hi: Box::new(rebuild(splits, leaves, hi)),
        }
    } else {
        DecisionTree::Leaf(leaves[&path].label)
    }
}

/// Learns a monotone target from random examples only.
pub fn learn_monotone(f: &TruthTable, cfg: &LearnerConfig) -> Result<(DecisionTree, LearnReport)> {
    cfg.validate()?;
    if !f.is_monotone() {
        return Err(Error::InvalidParams(
            "learn_monotone requires a monotone target".into(),
        ));
    }
    let eps = cfg.eps.to_f64();
    let delta = cfg.delta.to_f64();
    let m = sample_size_monotone(cfg.k, cfg.s, eps, delta);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(0);
    let train = draw_examples(f, m as usize, rng.gen());
    rng.set_stream(1);
    let validation = draw_examples(f, validation_size(cfg.k, eps, delta) as usize, rng.gen());
    learn_loop(
        f,
        cfg,
        Scorer::Monotone(&train),
        &train,
        &validation,
        "monotone",
        None,
    )
}

/// Learns an arbitrary target from random edge samples (influence
/// estimation) plus random examples (leaf labels and the stopping rule).
pub fn learn_general(f: &TruthTable, cfg: &LearnerConfig) -> Result<(DecisionTree, LearnReport)> {
    cfg.validate()?;
    let eps = cfg.eps.to_f64();
    let delta = cfg.delta.to_f64();
    let m = sample_size_monotone(cfg.k, cfg.s, eps, delta);
    let edge_count = edge_sample_size(f.n(), m, delta);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(0);
    let train = draw_examples(f, m as usize, rng.gen());
    rng.set_stream(1);
    let validation = draw_examples(f, validation_size(cfg.k, eps, delta) as usize, rng.gen());
    rng.set_stream(2);
    let edges = draw_edges(f, edge_count as usize, rng.gen());
    let bucket_sizes: Vec<u64> = (1..=f.n()).map(|i| edges.bucket(i).len() as u64).collect();
    learn_loop(
        f,
        cfg,
        Scorer::Edges(&edges, bucket_sizes),
        &train,
        &validation,
        "edges",
        Some(edge_count),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolfn::{majority, parity};

    #[test]
    fn draws_are_deterministic_and_sized() {
        let f = parity(2).unwrap();
        let a = draw_examples(&f, 100, 7);
        let b = draw_examples(&f, 100, 7);
        assert_eq!(a.examples, b.examples);
        assert!(draw_examples(&f, 0, 7).examples.is_empty());
        let e = draw_edges(&f, 50, 9);
        assert_eq!(e.edges.len(), 50);
        for edge in &e.edges {
            assert_eq!(edge.label_x, f.evaluate(edge.x));
            assert_eq!(
                edge.label_flip,
                f.evaluate(edge.x ^ (1 << (edge.coord - 1)))
            );
        }
    }

    #[test]
    fn empirical_mean_of_balanced_target() {
        let f = parity(2).unwrap();
        let s = draw_examples(&f, 100_000, 3);
        let mean: i64 = s.examples.iter().map(|&(_, y)| y as i64).sum();
        assert!((mean as f64 / 1e5).abs() < 0.02);
    }

    #[test]
    fn monotone_estimator_exact_on_full_support() {
        for seed in 0..20 {
            let f = crate::boolfn::random_monotone_function(6, seed).unwrap();
            let s = full_support(&f);
            for i in 1..=6 {
                let est = estimate_score_monotone(&s, &Restriction::empty(), i);
                let exact = crate::topdown::score(&f, &Restriction::empty(), i).unwrap();
                assert_eq!(est, exact.to_f64(), "seed={seed} i={i}");
            }
            // Deeper leaf.
            let leaf = Restriction::new(vec![(1, true)]).unwrap();
            for i in 2..=6 {
                let est = estimate_score_monotone(&s, &leaf, i);
                let exact = crate::topdown::score(&f, &leaf, i).unwrap();
                assert_eq!(est, exact.to_f64(), "seed={seed} i={i}");
            }
        }
        // Constant target: every estimate is 0.
        let c = TruthTable::constant(4, 1).unwrap();
        let s = full_support(&c);
        for i in 1..=4 {
            assert_eq!(estimate_score_monotone(&s, &Restriction::empty(), i), 0.0);
        }
    }

    #[test]
    fn monotone_estimator_concentrates() {
        let f = majority(3).unwrap();
        let s = draw_examples(&f, 100_000, 11);
        let est = estimate_score_monotone(&s, &Restriction::empty(), 1);
        assert!((est - 0.5).abs() < 0.02, "est={est}");
    }

    #[test]
    fn edge_estimator_exact_on_complete_sets() {
        for seed in 0..20 {
            let f = crate::boolfn::random_tree_function(6, 12, seed).unwrap();
            for i in 1..=6 {
                let e = complete_edges(&f, i);
                let est = estimate_score_edges(&e, &Restriction::empty(), i).unwrap();
                assert_eq!(est, f.influence(i).unwrap().to_f64());
                // Leaf fixing a different coordinate: exact restricted score.
                let other = if i == 1 { 2 } else { 1 };
                let leaf = Restriction::new(vec![(other, false)]).unwrap();
                let est = estimate_score_edges(&e, &leaf, i).unwrap();
                assert_eq!(est, crate::topdown::score(&f, &leaf, i).unwrap().to_f64());
                // A coordinate on the path estimates 0.
                let leaf_on = Restriction::new(vec![(i, false)]).unwrap();
                assert_eq!(estimate_score_edges(&e, &leaf_on, i).unwrap(), 0.0);
            }
        }
        // Parity: every edge disagrees.
        let par = parity(2).unwrap();
        let e = complete_edges(&par, 1);
        assert_eq!(
            estimate_score_edges(&e, &Restriction::empty(), 1).unwrap(),
            1.0
        );
        // AND_2, direction 1: exactly half the edges flip the output.
        let and2 = TruthTable::from_fn(2, |x| x == 3).unwrap();
        let e = complete_edges(&and2, 1);
        assert_eq!(
            estimate_score_edges(&e, &Restriction::empty(), 1).unwrap(),
            0.5
        );
        // Empty bucket is flagged.
        assert!(estimate_score_edges(&e, &Restriction::empty(), 2).is_none());
    }

    #[test]
    fn sample_size_formulas() {
        // Shrinking delta grows the sample.
        assert!(sample_size_monotone(100, 16, 0.1, 0.05) > sample_size_monotone(100, 16, 0.1, 0.1));
        assert!(sample_size_monotone(1, 2, 0.5, 0.5) >= 1);
        assert!(edge_sample_size(8, 100, 0.05) > edge_sample_size(8, 100, 0.1));

        // Audit against an independently coded form of the same formula
        // (natural logs and a different grouping).
        let audit = |k: u64, s: u64, eps: f64, delta: f64| -> u64 {
            let per_step = (k as f64) * (s as f64).ln() / std::f64::consts::LN_2 / eps;
            let conf = ((k as f64).ln() + (1.0 / delta).ln()) / std::f64::consts::LN_2;
            (12.0 * per_step * conf).ceil().max(1.0) as u64
        };
        for (k, s, e, d) in [
            (100u64, 16u64, 0.1, 0.1),
            (32, 4, 0.25, 0.05),
            (1, 2, 0.5, 0.5),
        ] {
            let got = sample_size_monotone(k, s, e, d);
            let want = audit(k, s, e, d);
            // Both routes round the same real number; allow the last-ulp
            // ceiling wobble of one.
            assert!(got.abs_diff(want) <= 1, "{got} vs {want}");
        }
    }

    #[test]
    fn learner_on_constant_target_returns_leaf() {
        let c = TruthTable::constant(5, -1).unwrap();
        let cfg = LearnerConfig {
            s: 1,
            eps: Frac::new(1, 10).unwrap(),
            delta: Frac::new(1, 10).unwrap(),
            k: 8,
            seed: 1,
        };
        let (tree, report) = learn_monotone(&c, &cfg).unwrap();
        assert_eq!(tree, DecisionTree::Leaf(-1));
        assert_eq!(report.steps, 0);
        assert_eq!(report.true_error, 0.0);
    }

    #[test]
    fn learner_rejects_nonmonotone_target() {
        let cfg = LearnerConfig {
            s: 4,
            eps: Frac::new(1, 10).unwrap(),
            delta: Frac::new(1, 10).unwrap(),
            k: 8,
            seed: 1,
        };
        assert!(learn_monotone(&parity(2).unwrap(), &cfg).is_err());
    }

    #[test]
    fn learner_fits_majority() {
        let f = majority(3).unwrap();
        let cfg = LearnerConfig {
            s: 8,
            eps: Frac::new(1, 20).unwrap(),
            delta: Frac::new(1, 10).unwrap(),
            k: 16,
            seed: 42,
        };
        let (_tree, report) = learn_monotone(&f, &cfg).unwrap();
        assert!(report.true_error <= 0.05, "err={}", report.true_error);
        assert!(report.quarter_score_ok);
    }

    #[test]
    fn edge_learner_recovers_parity_tree() {
        let f = parity(2).unwrap();
        let cfg = LearnerConfig {
            s: 4,
            eps: Frac::new(1, 10).unwrap(),
            delta: Frac::new(1, 10).unwrap(),
            k: 8,
            seed: 5,
        };
        let (tree, report) = learn_general(&f, &cfg).unwrap();
        assert_eq!(tree.size(), 4);
        assert_eq!(report.true_error, 0.0);
        assert!(!report.insufficient_edges);
    }
}
