//! The depth-budgeted recursive FIND fitter, well-distributed-sample
//! machinery, and the end-to-end proper learner built on them.
//!
//! FIND tries each relevant variable with halved size budgets, re-executes
//! one failing side at budget `s - 1`, and returns a None marker when the
//! size hypothesis cannot be met. Samples are never copied down the
//! recursion: views are index partitions over one immutable point store.

use std::io::{BufRead, Write};

use serde::Serialize;

use crate::boolfn::{Restriction, TruthTable};
use crate::dtree::DecisionTree;
use crate::error::{Error, Result};
use crate::frac::Frac;
use crate::learn::{draw_examples, ExampleSample};

/// A weighted view into an example sample: indices plus the restriction that
/// carved them out. Splitting partitions indices; point data stays put.
pub struct SampleView<'a> {
    sample: &'a ExampleSample,
    weights: Option<&'a [u32]>,
    idx: Vec<u32>,
    restriction: Restriction,
}

impl<'a> SampleView<'a> {
    pub fn whole(sample: &'a ExampleSample) -> Self {
        SampleView {
            sample,
            weights: None,
            idx: (0..sample.examples.len() as u32).collect(),
            restriction: Restriction::empty(),
        }
    }

    /// A view where entry `j` counts `weights[j]` times (deduplicated
    /// samples).
    pub fn weighted(sample: &'a ExampleSample, weights: &'a [u32]) -> Self {
        assert_eq!(sample.examples.len(), weights.len());
        SampleView {
            sample,
            weights: Some(weights),
            idx: (0..sample.examples.len() as u32).collect(),
            restriction: Restriction::empty(),
        }
    }

    fn weight_at(&self, idx: u32) -> u64 {
        self.weights.map_or(1, |w| w[idx as usize] as u64)
    }

    /// Total weight.
    pub fn len(&self) -> u64 {
        self.idx.iter().map(|&i| self.weight_at(i)).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.idx.is_empty()
    }

    pub fn restriction(&self) -> &Restriction {
        &self.restriction
    }

    fn label_at(&self, idx: u32) -> i8 {
        self.sample.examples[idx as usize].1
    }

    fn point_at(&self, idx: u32) -> u32 {
        self.sample.examples[idx as usize].0
    }

    /// `Some(label)` when every point carries the same label.
    pub fn uniform_label(&self) -> Option<i8> {
        let first = self.label_at(*self.idx.first()?);
        self.idx
            .iter()
            .all(|&i| self.label_at(i) == first)
            .then_some(first)
    }

    /// Weighted majority label; exact ties go to +1.
    pub fn majority_label(&self) -> i8 {
        let mut balance = 0i64;
        for &i in &self.idx {
            balance += self.label_at(i) as i64 * self.weight_at(i) as i64;
        }
        if balance < 0 {
            -1
        } else {
            1
        }
    }

    /// `(S_0^v, S_1^v)`: the points with coordinate `v` equal to 0 and 1.
    pub fn split(&self, v: usize) -> (SampleView<'a>, SampleView<'a>) {
        let (mut lo, mut hi) = (Vec::new(), Vec::new());
        for &i in &self.idx {
            if (self.point_at(i) >> (v - 1)) & 1 == 1 {
                hi.push(i);
            } else {
                lo.push(i);
            }
        }
        let mut r0 = self.restriction.clone();
        r0.push(v, false).expect("unfixed coordinate");
        let mut r1 = self.restriction.clone();
        r1.push(v, true).expect("unfixed coordinate");
        (
            SampleView {
                sample: self.sample,
                weights: self.weights,
                idx: lo,
                restriction: r0,
            },
            SampleView {
                sample: self.sample,
                weights: self.weights,
                idx: hi,
                restriction: r1,
            },
        )
    }

    /// Weighted count of points misclassified by `tree`, with the total
    /// weight.
    pub fn error_against(&self, tree: &DecisionTree) -> (u64, u64) {
        let mut miss = 0u64;
        let mut total = 0u64;
        for &i in &self.idx {
            let w = self.weight_at(i);
            total += w;
            if tree.eval(self.point_at(i)) != self.label_at(i) {
                miss += w;
            }
        }
        (miss, total)
    }
}

#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct FindCounters {
    pub calls: u64,
    pub peak_frames: u64,
}

/// Either a fitted tree or the None marker, plus recursion accounting.
#[derive(Debug)]
pub struct FindResult {
    pub tree: Option<DecisionTree>,
    pub counters: FindCounters,
}

struct FindState {
    calls: u64,
    live: u64,
    peak: u64,
}

/// Fits `view` with a tree of size at most `s` and depth at most `d`. Never
/// returns the None marker when the sample is exactly fit by a size-`s`
/// tree.
pub fn find(view: &SampleView<'_>, s: u64, d: u32) -> FindResult {
    let mut st = FindState {
        calls: 0,
        live: 0,
        peak: 0,
    };
    let tree = find_rec(view, s, d, &mut st);
    FindResult {
        tree,
        counters: FindCounters {
            calls: st.calls,
            peak_frames: st.peak,
        },
    }
}

fn find_rec(view: &SampleView<'_>, s: u64, d: u32, st: &mut FindState) -> Option<DecisionTree> {
    st.calls += 1;
    st.live += 1;
    st.peak = st.peak.max(st.live);
    let out = find_body(view, s, d, st);
    st.live -= 1;
    out
}

fn find_body(view: &SampleView<'_>, s: u64, d: u32, st: &mut FindState) -> Option<DecisionTree> {
    if let Some(label) = view.uniform_label() {
        return Some(DecisionTree::Leaf(label));
    }
    if s <= 1 {
        return None;
    }
    if d == 0 {
        return Some(DecisionTree::Leaf(view.majority_label()));
    }
    let n = view.sample.n;
    for v in 1..=n {
        if view.restriction.fixes(v).is_some() {
            continue;
        }
        let (s0, s1) = view.split(v);
        if s0.is_empty() || s1.is_empty() {
            continue;
        }
        let t0 = find_rec(&s0, s / 2, d - 1, st);
        let t1 = find_rec(&s1, s / 2, d - 1, st);
        match (t0, t1) {
            (Some(a), Some(b)) => {
                return Some(DecisionTree::Node {
                    var: v,
                    lo: Box::new(a),
                    hi: Box::new(b),
                });
            }
            (Some(a), None) => {
                let b = find_rec(&s1, s - 1, d - 1, st)?;
                return Some(DecisionTree::Node {
                    var: v,
                    lo: Box::new(a),
                    hi: Box::new(b),
                });
            }
            (None, Some(b)) => {
                let a = find_rec(&s0, s - 1, d - 1, st)?;
                return Some(DecisionTree::Node {
                    var: v,
                    lo: Box::new(a),
                    hi: Box::new(b),
                });
            }
            (None, None) => {}
        }
    }
    None
}

/// Outcome of a well-distributedness check; on failure `witness` names the
/// first violating restriction.
#[derive(Clone, Debug)]
pub struct WdCheck {
    pub ok: bool,
    pub witness: Option<Restriction>,
}

/// Exhaustively verifies `||S_α| - μ| ≤ c·μ` with `μ = 2^{-|α|}·|S|` for
/// every restriction of at most `d` coordinates.
pub fn well_distributed(view: &SampleView<'_>, c: Frac, d: usize) -> Result<WdCheck> {
    let n = view.sample.n;
    if d > n {
        return Err(Error::InvalidParams(format!("depth {d} exceeds n = {n}")));
    }
    let restriction_count: f64 = (0..=d).map(|i| binomial(n, i) * 2f64.powi(i as i32)).sum();
    if restriction_count > 2.5e8 {
        return Err(Error::InvalidParams(format!(
            "enumerating {restriction_count:.0} restrictions is beyond desk scale"
        )));
    }
    let total = view.len();
    for mask in 0u32..(1u32 << n) {
        let k = mask.count_ones() as usize;
        if k > d || k == 0 {
            if k == 0 {
                // The empty restriction always matches exactly.
                continue;
            }
            continue;
        }
        // Bucket the weighted points by their bits under the mask.
        let mut buckets = vec![0u64; 1 << k];
        for &i in &view.idx {
            let x = view.point_at(i);
            buckets[compress_bits(x, mask) as usize] += view.weight_at(i);
        }
        for (pattern, &count) in buckets.iter().enumerate() {
            // |count - total/2^k| <= c*total/2^k, cross-multiplied.
            let lhs = (count as i128 * (1i128 << k) - total as i128).unsigned_abs() * c.den as u128;
            let rhs = c.num as u128 * total as u128;
            if lhs > rhs {
                return Ok(WdCheck {
                    ok: false,
                    witness: Some(mask_restriction(mask, pattern as u32)),
                });
            }
        }
    }
    Ok(WdCheck {
        ok: true,
        witness: None,
    })
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1f64, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Packs the bits of `x` selected by `mask` into the low bits, in ascending
/// coordinate order.
fn compress_bits(x: u32, mask: u32) -> u32 {
    let mut out = 0u32;
    let mut bit = 0;
    let mut m = mask;
    while m != 0 {
        let p = m.trailing_zeros();
        out |= ((x >> p) & 1) << bit;
        bit += 1;
        m &= m - 1;
    }
    out
}

fn mask_restriction(mask: u32, pattern: u32) -> Restriction {
    let mut assignments = Vec::new();
    let mut bit = 0;
    let mut m = mask;
    while m != 0 {
        let p = m.trailing_zeros() as usize;
        assignments.push((p + 1, (pattern >> bit) & 1 == 1));
        bit += 1;
        m &= m - 1;
    }
    Restriction::new(assignments).expect("mask coordinates are distinct")
}

/// `⌈3·2^d/c²·(d·ln(2n) + ln(2/δ))⌉`: enough uniform samples to be
/// c-well-distributed to depth d with probability 1 - δ.
pub fn wd_sample_size(c: Frac, d: u32, n: usize, delta: f64) -> Result<u64> {
    let cf = c.to_f64();
    if !(cf > 0.0 && cf < 1.0) {
        return Err(Error::InvalidParams(format!("c = {c} must lie in (0,1)")));
    }
    let m = 3.0 * 2f64.powi(d as i32) / (cf * cf)
        * (d as f64 * (2.0 * n as f64).ln() + (2.0 / delta).ln());
    Ok((m.ceil() as u64).max(1))
}

/// `⌈(32/(9ε))·(2^d·ln(n+3) + ln(1/δ))⌉`: enough samples for a tree of depth
/// at most `d` with sample error ≤ ε/4 to generalize to error ≤ ε.
pub fn generalization_sample_size(d: u32, n: usize, eps: f64, delta: f64) -> Result<u64> {
    if eps <= 0.0 {
        return Err(Error::InvalidParams("eps must be positive".into()));
    }
    let m = 32.0 / (9.0 * eps) * (2f64.powi(d as i32) * ((n + 3) as f64).ln() + (1.0 / delta).ln());
    Ok((m.ceil() as u64).max(1))
}

/// Everything a proper-learning run reports.
#[derive(Clone, Debug, Serialize)]
pub struct ProperReport {
    pub s: u64,
    pub depth_budget: u32,
    pub samples: u64,
    pub distinct_points: u64,
    pub well_distributed: bool,
    pub none_returned: bool,
    /// Weighted sample error of the returned tree.
    pub sample_error: Option<f64>,
    /// Exact disagreement with the target.
    pub true_error: Option<f64>,
    pub find_calls: u64,
    pub peak_frames: u64,
}

/// The well-distributedness slack used by the proper learner.
pub const PROPER_C: Frac = Frac { num: 1, den: 2 };

/// Depth budget from the size bound and accuracy: `log2(s/ε)` scaled by the
/// decay rate of the per-level error factor `(3+c)/4`, capped at `n` (a
/// depth-n tree is already exact and restrictions beyond n do not exist).
pub fn proper_depth_budget(s: u64, eps: f64, n: usize) -> u32 {
    let c = PROPER_C.to_f64();
    let d = (s as f64 / eps).log2() / -(((3.0 + c) / 4.0).log2());
    (d.ceil() as u32).min(n as u32)
}

/// End-to-end proper learner: draw enough samples for both the
/// well-distributedness and generalization bounds, run FIND, and report.
/// A returned None marker (reported, not raised) signals that the size
/// hypothesis `s` was too small.
pub fn learn_proper(
    f: &TruthTable,
    s: u64,
    eps: Frac,
    delta: Frac,
    seed: u64,
) -> Result<(Option<DecisionTree>, ProperReport)> {
    let epsf = eps.to_f64();
    let deltaf = delta.to_f64();
    if !(epsf > 0.0 && epsf < 0.5) || !(deltaf > 0.0 && deltaf < 1.0) {
        return Err(Error::InvalidParams(
            "need eps in (0,1/2) and delta in (0,1)".into(),
        ));
    }
    let n = f.n();
    let d = proper_depth_budget(s, epsf, n);
    let m = wd_sample_size(PROPER_C, d, n, deltaf / 2.0)?.max(generalization_sample_size(
        d,
        n,
        epsf,
        deltaf / 2.0,
    )?);
    let raw = draw_examples(f, m as usize, seed);

    // Deduplicate into a weighted store; FIND's control flow only depends on
    // presence and weighted counts, so this changes nothing but speed.
    let mut counts = vec![0u32; f.num_points() as usize];
    for &(x, _) in &raw.examples {
        counts[x as usize] += 1;
    }
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (x, &w) in counts.iter().enumerate() {
        if w > 0 {
            points.push((x as u32, f.evaluate(x as u32)));
            weights.push(w);
        }
    }
    let distinct = points.len() as u64;
    let dedup = ExampleSample {
        n,
        examples: points,
        seed,
        target: raw.target.clone(),
    };
    let view = SampleView::weighted(&dedup, &weights);

    let wd = well_distributed(&view, PROPER_C, (d as usize).min(n))?;
    let result = find(&view, s, d);
    let (sample_error, true_error) = match &result.tree {
        Some(tree) => {
            let (miss, total) = view.error_against(tree);
            let tt = crate::dtree::to_truth_table(tree, n)?;
            (
                Some(miss as f64 / total.max(1) as f64),
                Some(tt.error(f)?.to_f64()),
            )
        }
        None => (None, None),
    };
    let report = ProperReport {
        s,
        depth_budget: d,
        samples: m,
        distinct_points: distinct,
        well_distributed: wd.ok,
        none_returned: result.tree.is_none(),
        sample_error,
        true_error,
        find_calls: result.counters.calls,
        peak_frames: result.counters.peak_frames,
    };
    Ok((result.tree, report))
}

/// Writes `n=<int>` then one `bitstring label` line per example; bitstring
/// position j (left to right) is coordinate j.
pub fn write_sample(mut w: impl Write, sample: &ExampleSample) -> Result<()> {
    writeln!(w, "n={}", sample.n)?;
    for &(x, y) in &sample.examples {
        let bits: String = (0..sample.n)
            .map(|p| if (x >> p) & 1 == 1 { '1' } else { '0' })
            .collect();
        writeln!(w, "{bits} {y}")?;
    }
    Ok(())
}

pub fn read_sample(r: impl BufRead) -> Result<ExampleSample> {
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| Error::Parse {
        at: "line 1".into(),
        msg: "empty file".into(),
    })??;
    let n: usize = header
        .trim()
        .strip_prefix("n=")
        .ok_or_else(|| Error::Parse {
            at: "line 1".into(),
            msg: "expected `n=<int>`".into(),
        })?
        .parse()
        .map_err(|e| Error::Parse {
            at: "line 1".into(),
            msg: format!("bad count: {e}"),
        })?;
    if n == 0 || n > crate::boolfn::MAX_VARS {
        return Err(Error::TooManyVariables(n));
    }
    let mut examples = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let at = || format!("line {}", lineno + 2);
        let (bits, label) = t.split_once(' ').ok_or_else(|| Error::Parse {
            at: at(),
            msg: "expected `bitstring label`".into(),
        })?;
        if bits.len() != n {
            return Err(Error::Parse {
                at: at(),
                msg: format!("expected {n} bits"),
            });
        }
        let mut x = 0u32;
        for (p, ch) in bits.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => x |= 1 << p,
                _ => {
                    return Err(Error::Parse {
                        at: at(),
                        msg: format!("bad bit {ch:?}"),
                    })
                }
            }
        }
        let y = match label.trim() {
            "1" | "+1" => 1i8,
            "-1" => -1i8,
            other => {
                return Err(Error::Parse {
                    at: at(),
                    msg: format!("bad label {other:?}"),
                })
            }
        };
        examples.push((x, y));
    }
    Ok(ExampleSample {
        n,
        examples,
        seed: 0,
        target: "file".into(),
    })
}
