//! Experiment harness: separation tables, impurity comparisons, bound-check
//! corpora, learner and FIND benches, with deterministic CSV/JSON emission.

pub mod constructions;

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::boolfn::{self, FamilyParams, TruthTable};
use crate::dtree::{self, DecisionTree};
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::frac::Frac;
use crate::learn::{self, LearnerConfig};
use crate::topdown::{self, BuildOptions, ImpurityFn, SplitCriterion, Termination};
use crate::{ehfind, ehfind::SampleView};

/// Crate version stamped into every table header.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Fully determines a run; hashed into the output header so identical specs
/// yield byte-identical files.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub experiment: String,
    pub params: serde_json::Value,
    pub seed: u64,
}

impl ExperimentSpec {
    pub fn new(experiment: &str, params: serde_json::Value, seed: u64) -> Self {
        ExperimentSpec {
            experiment: experiment.into(),
            params,
            seed,
        }
    }

    fn hash(&self) -> String {
        let canon = serde_json::to_string(self).expect("spec serializes");
        // FNV-1a, enough to tag a schema + spec combination.
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in canon.bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x100_0000_01b3);
        }
        format!("{h:016x}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::InvalidParams(format!("unknown format {other:?}"))),
        }
    }
}

/// A rectangular result table with canonical (pre-sorted) row order.
#[derive(Clone, Debug)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, spec: &ExperimentSpec, format: OutputFormat) -> String {
        fn field(v: &str) -> String {
            if v.contains([',', '"', '\n']) {
                format!("\"{}\"", v.replace('"', "\"\""))
            } else {
                v.to_string()
            }
        }
        match format {
            OutputFormat::Csv => {
                let mut out = String::new();
                let _ = writeln!(out, "# topdown-dt v{VERSION} spec={}", spec.hash());
                let _ = writeln!(out, "{}", self.columns.join(","));
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(|v| field(v)).collect();
                    let _ = writeln!(out, "{}", cells.join(","));
                }
                out
            }
            OutputFormat::Json => {
                let rows: Vec<serde_json::Value> = self
                    .rows
                    .iter()
                    .map(|r| {
                        let obj: serde_json::Map<String, serde_json::Value> = self
                            .columns
                            .iter()
                            .zip(r)
                            .map(|(c, v)| (c.clone(), json!(v)))
                            .collect();
                        serde_json::Value::Object(obj)
                    })
                    .collect();
                let doc = json!({
                    "schema": format!("topdown-dt v{VERSION}"),
                    "spec_hash": spec.hash(),
                    "spec": spec,
                    "rows": rows,
                });
                let mut s = serde_json::to_string_pretty(&doc).expect("table serializes");
                s.push('\n');
                s
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExactFamily {
    Nonmonotone,
    Monotone,
}

impl std::str::FromStr for ExactFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nonmonotone" => Ok(ExactFamily::Nonmonotone),
            "monotone" => Ok(ExactFamily::Monotone),
            other => Err(Error::InvalidParams(format!("unknown family {other:?}"))),
        }
    }
}

/// One row of an exact-separation table.
#[derive(Clone, Debug, Serialize)]
pub struct SeparationRow {
    pub h: usize,
    pub n: usize,
    pub opt_size: u64,
    /// `oracle` when certified minimal, `construction` when an upper bound.
    pub opt_provenance: String,
    pub topdown_size: u64,
    pub topdown_depth: usize,
    pub ratio: f64,
}

/// Exact-representation separation: top-down sizes against the optimal (or
/// certified-construction) column, one row per recursion depth.
pub fn run_separation_exact(family: ExactFamily, h_max: usize) -> Result<Vec<SeparationRow>> {
    let mut rows = Vec::new();
    for h in 0..=h_max {
        let (f, layout) = match family {
            ExactFamily::Nonmonotone => boolfn::family_exact_nonmonotone(h)?,
            ExactFamily::Monotone => boolfn::family_exact_monotone(h)?,
        };
        let construction = match family {
            ExactFamily::Nonmonotone => constructions::exact_nonmonotone_tree(h, &layout),
            ExactFamily::Monotone => constructions::exact_monotone_tree(h, &layout),
        };
        debug_assert!(dtree::to_truth_table(&construction, f.n())?
            .error(&f)?
            .is_zero());
        // The oracle is certified only at desk scale; larger instances carry
        // the verified construction size instead.
        let (opt_size, provenance) = if f.n() <= 10 {
            (dtree::optimal_size(&f)?, "oracle")
        } else {
            (construction.size(), "construction")
        };
        let opts = BuildOptions::new(SplitCriterion::Influence, Frac::zero())?;
        let built = topdown::build_top_down(&f, &opts)?;
        rows.push(SeparationRow {
            h,
            n: f.n(),
            opt_size,
            opt_provenance: provenance.into(),
            topdown_size: built.tree.size(),
            topdown_depth: built.tree.depth(),
            ratio: built.tree.size() as f64 / opt_size as f64,
        });
    }
    Ok(rows)
}

pub fn separation_table(rows: &[SeparationRow]) -> Table {
    let mut t = Table::new(&[
        "h",
        "n",
        "opt_size",
        "opt_provenance",
        "topdown_size",
        "topdown_depth",
        "ratio",
    ]);
    for r in rows {
        t.push(vec![
            r.h.to_string(),
            r.n.to_string(),
            r.opt_size.to_string(),
            r.opt_provenance.clone(),
            r.topdown_size.to_string(),
            r.topdown_depth.to_string(),
            format!("{:.4}", r.ratio),
        ]);
    }
    t
}

#[derive(Clone, Debug, Serialize)]
pub struct ApproxRow {
    pub h: usize,
    pub n: usize,
    pub construction_size: u64,
    pub topdown_size: u64,
    pub topdown_depth: usize,
    pub gateway_nodes: u64,
    pub gateway_oracle: u64,
}

/// Approximate-representation separation at tiny parameters: rows for
/// `h = 0..=params.h`, carrying the certified construction size, the
/// top-down ε-tree size, and the gateway-node diagnostics (computed twice:
/// by the tree walk and by exhaustive path enumeration).
pub fn run_separation_approx(
    family: ExactFamily,
    params: &FamilyParams,
    eps: Frac,
) -> Result<Vec<ApproxRow>> {
    let mut rows = Vec::new();
    for h in 0..=params.h {
        let p = FamilyParams { h, ..*params };
        let (f, layout) = match family {
            ExactFamily::Nonmonotone => boolfn::family_approx_nonmonotone(&p)?,
            ExactFamily::Monotone => boolfn::family_approx_monotone(&p)?,
        };
        let construction = match family {
            ExactFamily::Nonmonotone => {
                let (_, base) = boolfn::tribes(p.r)?;
                constructions::approx_nonmonotone_tree(&p, &layout, &base)?
            }
            ExactFamily::Monotone => {
                let (_, g1) = boolfn::tribes_biased(p.ell, p.delta, boolfn::TribesSide::Delta)?;
                let (_, g2) =
                    boolfn::tribes_biased(p.ell, p.delta, boolfn::TribesSide::OneMinusDelta)?;
                let (_, base) = boolfn::tribes(p.r)?;
                constructions::approx_monotone_tree(&p, &layout, &g1, &g2, &base)?
            }
        };
        debug_assert!(dtree::to_truth_table(&construction, f.n())?
            .error(&f)?
            .is_zero());
        let opts = BuildOptions::new(SplitCriterion::Influence, eps)?;
        let built = topdown::build_top_down(&f, &opts)?;
        let gateway = topdown::count_z_gateway_nodes(&built.tree, &layout);
        rows.push(ApproxRow {
            h,
            n: f.n(),
            construction_size: construction.size(),
            topdown_size: built.tree.size(),
            topdown_depth: built.tree.depth(),
            gateway_nodes: gateway,
            gateway_oracle: gateway_path_walk_oracle(&built.tree, &layout.z_coords()),
        });
    }
    Ok(rows)
}

/// Independent gateway count: enumerate every root-to-leaf path and count
/// distinct nodes at which the path first meets a z-coordinate.
fn gateway_path_walk_oracle(tree: &DecisionTree, z: &[usize]) -> u64 {
    use std::collections::BTreeSet;
    fn walk(
        t: &DecisionTree,
        z: &[usize],
        node_id: &mut u64,
        path: &mut Vec<(u64, usize)>,
        firsts: &mut BTreeSet<u64>,
    ) {
        let id = *node_id;
        *node_id += 1;
        match t {
            DecisionTree::Leaf(_) => {
                if let Some(&(first_id, _)) = path.iter().find(|(_, v)| z.contains(v)) {
                    firsts.insert(first_id);
                }
            }
            DecisionTree::Node { var, lo, hi } => {
                path.push((id, *var));
                walk(lo, z, node_id, path, firsts);
                walk(hi, z, node_id, path, firsts);
                path.pop();
            }
        }
    }
    let mut firsts = BTreeSet::new();
    walk(tree, z, &mut 0, &mut Vec::new(), &mut firsts);
    firsts.len() as u64
}

pub fn approx_table(rows: &[ApproxRow]) -> Table {
    let mut t = Table::new(&[
        "h",
        "n",
        "construction_size",
        "topdown_size",
        "topdown_depth",
        "gateway_nodes",
        "gateway_oracle",
    ]);
    for r in rows {
        t.push(vec![
            r.h.to_string(),
            r.n.to_string(),
            r.construction_size.to_string(),
            r.topdown_size.to_string(),
            r.topdown_depth.to_string(),
            r.gateway_nodes.to_string(),
            r.gateway_oracle.to_string(),
        ]);
    }
    t
}

pub const ALL_CRITERIA: [SplitCriterion; 5] = [
    SplitCriterion::Influence,
    SplitCriterion::Correlation,
    SplitCriterion::Impurity(ImpurityFn::Gini),
    SplitCriterion::Impurity(ImpurityFn::Entropy),
    SplitCriterion::Impurity(ImpurityFn::Sqrt),
];

#[derive(Clone, Debug, Serialize)]
pub struct ImpurityCompareRow {
    pub target: String,
    pub criterion: String,
    pub eps: String,
    pub size: u64,
    pub depth: usize,
    pub termination: String,
    /// The built tree is node-for-node identical to the influence
    /// criterion's tree for the same target.
    pub matches_influence: bool,
}

/// Built sizes per target × criterion at a fixed ε. On monotone targets at
/// ε = 0, every strictly concave criterion (and correlation) produces the
/// influence criterion's tree under the shared tie-break, reported in the
/// `matches_influence` column.
pub fn run_impurity_compare(seed: u64, monotone_targets: usize) -> Result<Vec<ImpurityCompareRow>> {
    let mut rows = Vec::new();
    let mut run = |name: &str, f: &TruthTable, eps: Frac| -> Result<()> {
        let mut reference: Option<DecisionTree> = None;
        for criterion in ALL_CRITERIA {
            let opts = BuildOptions::new(criterion, eps)?;
            let built = topdown::build_top_down(f, &opts)?;
            let matches_influence = match &reference {
                None => {
                    reference = Some(built.tree.clone());
                    true
                }
                Some(r) => *r == built.tree,
            };
            rows.push(ImpurityCompareRow {
                target: name.into(),
                criterion: criterion.to_string(),
                eps: eps.to_string(),
                size: built.tree.size(),
                depth: built.tree.depth(),
                termination: match built.trace.termination {
                    Termination::Accuracy => "accuracy".into(),
                    Termination::Budget => "budget".into(),
                },
                matches_influence,
            });
        }
        Ok(())
    };

    // Two-variable parity embedded in n = 6, at ε = 1/4.
    let par6 = TruthTable::from_fn(6, |x| ((x >> 4) ^ (x >> 5)) & 1 == 1)?;
    run("parity2_in_n6", &par6, Frac::new(1, 4)?)?;
    // A constant target builds a single leaf under every criterion.
    run("constant", &TruthTable::constant(6, 1)?, Frac::new(1, 4)?)?;
    for t in 0..monotone_targets {
        let f = boolfn::random_monotone_function(8, seed.wrapping_add(t as u64))?;
        run(&format!("monotone_{t}"), &f, Frac::zero())?;
    }
    Ok(rows)
}

pub fn impurity_table(rows: &[ImpurityCompareRow]) -> Table {
    let mut t = Table::new(&[
        "target",
        "criterion",
        "eps",
        "size",
        "depth",
        "termination",
        "matches_influence",
    ]);
    for r in rows {
        t.push(vec![
            r.target.clone(),
            r.criterion.clone(),
            r.eps.clone(),
            r.size.to_string(),
            r.depth.to_string(),
            r.termination.clone(),
            r.matches_influence.to_string(),
        ]);
    }
    t
}

/// Aggregated verdict for one checked property.
#[derive(Clone, Debug, Serialize)]
pub struct PropertyResult {
    pub name: String,
    pub checked: u64,
    pub failures: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_counterexample: Option<String>,
}

impl PropertyResult {
    fn from_outcomes(name: &str, outcomes: Vec<Option<String>>) -> Self {
        let checked = outcomes.len() as u64;
        let failures = outcomes.iter().filter(|o| o.is_some()).count() as u64;
        let first_counterexample = outcomes.into_iter().flatten().next();
        PropertyResult {
            name: name.into(),
            checked,
            failures,
            first_counterexample,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub properties: Vec<PropertyResult>,
    pub all_pass: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct CheckConfig {
    pub seed: u64,
    /// Random labeled trees for the size-bound corpus (n ≤ 12).
    pub tree_corpus: usize,
    /// Random monotone functions (n ≤ 10).
    pub monotone_corpus: usize,
    /// Random targets for the early-stop prefix property.
    pub prefix_corpus: usize,
    /// Deliberately misalign the per-step score bound to prove the harness
    /// detects violations.
    pub inject_bug: bool,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            seed: 0,
            tree_corpus: 500,
            monotone_corpus: 500,
            prefix_corpus: 100,
            inject_bug: false,
        }
    }
}

const SLACK: f64 = topdown::BOUND_SLACK;

/// Runs the whole property corpus and reports pass/fail counts per property
/// with the first counterexample serialized.
pub fn run_bound_checks(cfg: &CheckConfig) -> Result<CheckReport> {
    let mut properties = Vec::new();

    // Corpus of random labeled trees with oracle-certified optimal sizes.
    struct TreeCase {
        id: u64,
        f: TruthTable,
        gen_size: u64,
        gen_depth: usize,
        avg_depth: Dyadic,
        s: u64,
    }
    let tree_cases: Vec<TreeCase> = (0..cfg.tree_corpus as u64)
        .into_par_iter()
        .map(|i| {
            let n = 8 + (i % 5) as usize; // 8..=12
            let s = 4 + (i % 29) as usize; // 4..=32
            let tree = dtree::random_tree(n, s, cfg.seed.wrapping_add(i))?;
            let f = dtree::to_truth_table(&tree, n)?;
            let st = dtree::stats(&tree);
            Ok(TreeCase {
                id: i,
                f: f.clone(),
                gen_size: st.size,
                gen_depth: st.depth,
                avg_depth: st.average_depth,
                s: dtree::optimal_size(&f)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let max_inf_var = tree_cases
        .par_iter()
        .map(|c| {
            if c.s <= 1 {
                return None; // constant: Var = 0, log s = 0, vacuous
            }
            let max_inf = (1..=c.f.n())
                .map(|i| c.f.influence(i).expect("coord"))
                .max()
                .expect("n >= 1");
            let rhs = c.f.variance().to_f64() / (c.s as f64).log2();
            (max_inf.to_f64() + SLACK < rhs)
                .then(|| format!("tree {}: max_inf {} < Var/log2(s) {rhs}", c.id, max_inf))
        })
        .collect();
    properties.push(PropertyResult::from_outcomes(
        "max_influence_ge_var_over_log_size",
        max_inf_var,
    ));

    let inf_log = tree_cases
        .par_iter()
        .map(|c| {
            let inf = c.f.total_influence().to_f64();
            let bound = (c.s.max(2) as f64).log2();
            if c.s == 1 {
                return (inf != 0.0).then(|| format!("tree {}: constant with Inf {inf}", c.id));
            }
            (inf > bound + SLACK).then(|| format!("tree {}: Inf {inf} > log2(s) {bound}", c.id))
        })
        .collect();
    properties.push(PropertyResult::from_outcomes(
        "total_influence_le_log_size",
        inf_log,
    ));

    let inf_var = tree_cases
        .par_iter()
        .map(|c| {
            let var = c.f.variance().to_f64();
            if var == 0.0 {
                return None;
            }
            let inf = c.f.total_influence().to_f64();
            let bound = var * (4.0 * c.s as f64 / var).log2();
            (inf > bound + SLACK)
                .then(|| format!("tree {}: Inf {inf} > Var*log2(4s/Var) {bound}", c.id))
        })
        .collect();
    properties.push(PropertyResult::from_outcomes(
        "total_influence_le_var_bound",
        inf_var,
    ));

    let oracle_vs_generated = tree_cases
        .par_iter()
        .map(|c| {
            (c.s > c.gen_size).then(|| {
                format!(
                    "tree {}: oracle {} exceeds generated size {}",
                    c.id, c.s, c.gen_size
                )
            })
        })
        .collect();
    properties.push(PropertyResult::from_outcomes(
        "oracle_le_generated_size",
        oracle_vs_generated,
    ));

    let avg_depth = tree_cases
        .par_iter()
        .map(|c| {
            let lhs = c.avg_depth.to_f64();
            let ok = lhs <= (c.gen_size as f64).log2() + SLACK
                && c.avg_depth <= Dyadic::from_int(c.gen_depth as i64);
            (!ok).then(|| format!("tree {}: avg depth {lhs} vs size {}", c.id, c.gen_size))
        })
        .collect();
    properties.push(PropertyResult::from_outcomes(
        "avg_depth_le_log_size",
        avg_depth,
    ));

    // Influence-criterion traces at ε = 1/8: per-step bounds, exact cost
    // telescoping, and the accuracy guarantee.
    let eps = Frac::new(1, 8)?;
    let trace_results: Vec<(Option<String>, Option<String>, Option<String>)> = tree_cases
        .par_iter()
        .map(|c| {
            let opts = BuildOptions::new(SplitCriterion::Influence, eps).expect("valid eps");
            let built = topdown::build_top_down(&c.f, &opts).expect("build");
            let mut trace = built.trace;
            if cfg.inject_bug {
                // Misalign scores by one step: step j gets step j+1's score
                // (the final step gets zero), which must break the bound.
                for i in 0..trace.steps.len() {
                    trace.steps[i].score = if i + 1 < trace.steps.len() {
                        trace.steps[i + 1].score.clone()
                    } else {
                        Dyadic::zero()
                    };
                }
            }
            let bounds = topdown::assert_score_bounds(&trace, c.s, eps);
            let score_fail = (!bounds.all_pass).then(|| {
                let bad = bounds
                    .steps
                    .iter()
                    .find(|s| !s.additive_pass)
                    .map(|s| s.step);
                format!("tree {}: score bound failed at step {bad:?}", c.id)
            });
            let mut cost = trace.initial_cost.clone();
            let mut telescope_fail = None;
            for step in &trace.steps {
                if step.cost_before != cost || step.cost_after != &cost - &step.score {
                    telescope_fail = Some(format!(
                        "tree {}: telescoping broke at step {}",
                        c.id, step.step
                    ));
                    break;
                }
                cost = step.cost_after.clone();
            }
            let acc_fail = (trace.termination == Termination::Accuracy
                && trace.final_error.cmp_ratio(1, 8) == std::cmp::Ordering::Greater)
                .then(|| format!("tree {}: final error above eps", c.id));
            (score_fail, telescope_fail, acc_fail)
        })
        .collect();
    properties.push(PropertyResult::from_outcomes(
        "score_lower_bounds",
        trace_results.iter().map(|t| t.0.clone()).collect(),
    ));
    properties.push(PropertyResult::from_outcomes(
        "cost_telescoping_exact",
        trace_results.iter().map(|t| t.1.clone()).collect(),
    ));
    properties.push(PropertyResult::from_outcomes(
        "accuracy_termination_error",
        trace_results.iter().map(|t| t.2.clone()).collect(),
    ));

    // Monotone corpus: influence/correlation agreement, the square-root
    // total-influence bound, and argmax equivalence for every impurity
    // function.
    let monotone_results: Vec<(Option<String>, Option<String>, Option<String>)> = (0..cfg
        .monotone_corpus as u64)
        .into_par_iter()
        .map(|i| {
            let n = 6 + (i % 5) as usize; // 6..=10
            let f = boolfn::random_monotone_function(n, cfg.seed.wrapping_add(7000 + i))
                .expect("params valid");
            let corr_fail = (1..=n)
                .find(|&j| f.correlation(j).expect("coord") != f.influence(j).expect("coord"))
                .map(|j| format!("monotone {i}: correlation != influence at {j}"));
            let s = dtree::optimal_size(&f).expect("n <= 10");
            let inf = f.total_influence().to_f64();
            let sqrt_fail = (inf > (s as f64).log2().sqrt() + SLACK)
                .then(|| format!("monotone {i}: Inf {inf} > sqrt(log2 {s})"));
            let influences: Vec<Dyadic> =
                (1..=n).map(|j| f.influence(j).expect("coord")).collect();
            let max_inf = influences.iter().max().expect("nonempty").clone();
            let inf_argmax: Vec<usize> =
                (0..n).filter(|&j| influences[j] == max_inf).collect();
            let mut argmax_fail = None;
            for g in [ImpurityFn::Gini, ImpurityFn::Entropy, ImpurityFn::Sqrt] {
                let gains: Vec<f64> = (1..=n)
                    .map(|j| topdown::purity_gain(&f, j, g).expect("coord"))
                    .collect();
                let max_gain = gains.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let gain_argmax: Vec<usize> = (0..n)
                    .filter(|&j| (gains[j] - max_gain).abs() <= 1e-12)
                    .collect();
                if gain_argmax != inf_argmax {
                    argmax_fail = Some(format!(
                        "monotone {i}: {g:?} argmax {gain_argmax:?} != influence argmax {inf_argmax:?}"
                    ));
                    break;
                }
            }
            (corr_fail, sqrt_fail, argmax_fail)
        })
        .collect();
    properties.push(PropertyResult::from_outcomes(
        "monotone_correlation_eq_influence",
        monotone_results.iter().map(|t| t.0.clone()).collect(),
    ));
    properties.push(PropertyResult::from_outcomes(
        "monotone_influence_le_sqrt_log_size",
        monotone_results.iter().map(|t| t.1.clone()).collect(),
    ));
    properties.push(PropertyResult::from_outcomes(
        "monotone_purity_argmax_eq_influence_argmax",
        monotone_results.iter().map(|t| t.2.clone()).collect(),
    ));

    // Early-stop prefix property at ε = 1/4 versus 1/8.
    let prefix = (0..cfg.prefix_corpus as u64)
        .into_par_iter()
        .map(|i| {
            let f = boolfn::random_tree_function(9, 14, cfg.seed.wrapping_add(3000 + i))
                .expect("params valid");
            let coarse = topdown::build_top_down(
                &f,
                &BuildOptions::new(SplitCriterion::Influence, Frac::new(1, 4).expect("valid"))
                    .expect("valid"),
            )
            .expect("build");
            let fine = topdown::build_top_down(
                &f,
                &BuildOptions::new(SplitCriterion::Influence, Frac::new(1, 8).expect("valid"))
                    .expect("valid"),
            )
            .expect("build");
            let ok = topdown::trace_is_prefix(&coarse.trace, &fine.trace)
                && dtree::is_pruning_of(&coarse.bare, &fine.bare);
            (!ok).then(|| format!("target {i}: eps=1/4 trace not a prefix of eps=1/8"))
        })
        .collect();
    properties.push(PropertyResult::from_outcomes("early_stop_prefix", prefix));

    // Influence-order preservation inside composed families under random
    // restrictions.
    properties.push(influence_order_property(cfg.seed)?);

    // Monotone targets at ε = 0 build the same tree under every criterion.
    let impurity_rows = run_impurity_compare(cfg.seed, 10)?;
    let tree_matches = impurity_rows
        .iter()
        .filter(|r| r.target.starts_with("monotone_"))
        .map(|r| {
            (!r.matches_influence)
                .then(|| format!("{} under {} diverged from influence", r.target, r.criterion))
        })
        .collect();
    properties.push(PropertyResult::from_outcomes(
        "monotone_criteria_build_same_tree",
        tree_matches,
    ));

    // Learner bench: at least 90% of seeded trials succeed on both the
    // monotone-example and parity-edge tracks.
    let learn_rows = run_learn_bench(cfg.seed, 20, Frac::new(1, 10)?, Frac::new(1, 10)?)?;
    for mode in ["monotone", "edges_parity"] {
        let (ok, total): (u64, u64) = learn_rows
            .iter()
            .filter(|r| r.mode == mode)
            .fold((0, 0), |(ok, t), r| (ok + r.success as u64, t + 1));
        let outcome =
            (ok * 10 < total * 9).then(|| format!("{mode}: only {ok}/{total} trials succeeded"));
        properties.push(PropertyResult::from_outcomes(
            &format!("learn_bench_{mode}"),
            vec![outcome],
        ));
    }

    // FIND bench: sample error weakly decreasing in the depth budget, and
    // always within the per-depth error bound.
    let find_rows = run_find_bench(cfg.seed, 10)?;
    let find_outcomes = find_rows
        .chunks(9)
        .map(|sweep| {
            let monotone = sweep
                .windows(2)
                .all(|w| w[1].sample_error <= w[0].sample_error + 1e-12);
            let bounded = sweep.iter().all(|r| r.within_bound);
            (!(monotone && bounded))
                .then(|| format!("seed {}: d-sweep not monotone/bounded", sweep[0].tree_seed))
        })
        .collect();
    properties.push(PropertyResult::from_outcomes(
        "find_bench_depth_sweep",
        find_outcomes,
    ));

    let all_pass = properties.iter().all(|p| p.failures == 0);
    Ok(CheckReport {
        properties,
        all_pass,
    })
}

/// For the approximate nonmonotone family at tiny parameters: the relative
/// order of influences of two inner-block coordinates agrees between the
/// inner function and the composite, under random restrictions.
fn influence_order_property(seed: u64) -> Result<PropertyResult> {
    use rand::{Rng, SeedableRng};
    let params_inner = FamilyParams {
        h: 1,
        ell: 2,
        k: 2,
        r: 4,
        delta: (1, 4),
    };
    let params_outer = FamilyParams {
        h: 2,
        ell: 2,
        k: 2,
        r: 4,
        delta: (1, 4),
    };
    let (inner, inner_layout) = boolfn::family_approx_nonmonotone(&params_inner)?;
    let (outer, outer_layout) = boolfn::family_approx_nonmonotone(&params_outer)?;
    // Map the inner function's coordinates into the composite layout.
    let mut pairs: Vec<(usize, usize)> = Vec::new(); // (inner coord, outer coord)
    for block in &inner_layout.blocks {
        let outer_block = outer_layout
            .block(&block.name, block.level, block.part)
            .expect("inner blocks embed");
        for (a, b) in block.coords.iter().zip(&outer_block.coords) {
            pairs.push((*a, *b));
        }
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x1dea));
    let mut outcomes = Vec::new();
    for trial in 0..100 {
        // Random restriction over composite coordinates (possibly empty).
        let len = rng.gen_range(0..=4);
        let mut coords: Vec<usize> = (1..=outer.n()).collect();
        for k in 0..len {
            let j = rng.gen_range(k..coords.len());
            coords.swap(k, j);
        }
        let outer_restr: Vec<(usize, bool)> = coords[..len]
            .iter()
            .map(|&c| (c, rng.gen_bool(0.5)))
            .collect();
        let inner_restr: Vec<(usize, bool)> = outer_restr
            .iter()
            .filter_map(|&(c, b)| {
                pairs
                    .iter()
                    .find(|&&(_, oc)| oc == c)
                    .map(|&(ic, _)| (ic, b))
            })
            .collect();
        let outer_sub = outer.restrict(&boolfn::Restriction::new(outer_restr.clone())?)?;
        let inner_sub = inner.restrict(&boolfn::Restriction::new(inner_restr.clone())?)?;
        // Two random inner coordinates that survive the restriction.
        let live: Vec<&(usize, usize)> = pairs
            .iter()
            .filter(|(ic, oc)| {
                inner_restr.iter().all(|(c, _)| c != ic) && outer_restr.iter().all(|(c, _)| c != oc)
            })
            .collect();
        if live.len() < 2 {
            outcomes.push(None);
            continue;
        }
        let a = live[rng.gen_range(0..live.len())];
        let b = live[rng.gen_range(0..live.len())];
        let inner_inf = |c: usize, fixed: &[(usize, bool)]| {
            let pos = (1..=inner.n())
                .filter(|x| fixed.iter().all(|(fc, _)| fc != x))
                .position(|x| x == c)
                .expect("live coordinate");
            inner_sub.influence(pos + 1).expect("coord")
        };
        let outer_inf = |c: usize, fixed: &[(usize, bool)]| {
            let pos = (1..=outer.n())
                .filter(|x| fixed.iter().all(|(fc, _)| fc != x))
                .position(|x| x == c)
                .expect("live coordinate");
            outer_sub.influence(pos + 1).expect("coord")
        };
        let (oa, ob) = (outer_inf(a.1, &outer_restr), outer_inf(b.1, &outer_restr));
        if oa.is_zero() && ob.is_zero() {
            // The restriction cut the inner function off entirely: composite
            // influences are a zero multiple of the inner ones and carry no
            // order information.
            outcomes.push(None);
            continue;
        }
        let inner_order = inner_inf(a.0, &inner_restr).cmp(&inner_inf(b.0, &inner_restr));
        let outer_order = oa.cmp(&ob);
        outcomes.push((inner_order != outer_order).then(|| {
            format!(
                "trial {trial}: inner order {inner_order:?} vs composite {outer_order:?} for coords {a:?},{b:?}"
            )
        }));
    }
    Ok(PropertyResult::from_outcomes(
        "family_influence_order_preserved",
        outcomes,
    ))
}

pub fn check_table(report: &CheckReport) -> Table {
    let mut t = Table::new(&["property", "checked", "failures", "first_counterexample"]);
    for p in &report.properties {
        t.push(vec![
            p.name.clone(),
            p.checked.to_string(),
            p.failures.to_string(),
            p.first_counterexample.clone().unwrap_or_default(),
        ]);
    }
    t
}

#[derive(Clone, Debug, Serialize)]
pub struct LearnBenchRow {
    pub trial: u64,
    pub mode: String,
    pub steps: u64,
    pub true_error: f64,
    pub success: bool,
    pub quarter_score_ok: bool,
}

/// Seeded learner trials on random monotone targets (examples) and the
/// embedded parity target (edges).
pub fn run_learn_bench(
    seed: u64,
    trials: u64,
    eps: Frac,
    delta: Frac,
) -> Result<Vec<LearnBenchRow>> {
    let rows: Vec<LearnBenchRow> = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<Vec<LearnBenchRow>> {
            // A random monotone target of oracle size <= 16 on 10 variables.
            let mut f = None;
            for attempt in 0..64 {
                let candidate =
                    boolfn::random_monotone_function(10, seed.wrapping_add(trial * 64 + attempt))?;
                if dtree::optimal_size(&candidate)? <= 16 {
                    f = Some(candidate);
                    break;
                }
            }
            let f =
                f.ok_or_else(|| Error::InvalidParams("no small monotone target found".into()))?;
            let cfg = LearnerConfig {
                s: 16,
                eps,
                delta,
                k: 64,
                seed: seed.wrapping_add(trial),
            };
            let (_, rep) = learn::learn_monotone(&f, &cfg)?;
            let mono = LearnBenchRow {
                trial,
                mode: "monotone".into(),
                steps: rep.steps,
                true_error: rep.true_error,
                success: rep.true_error <= eps.to_f64(),
                quarter_score_ok: rep.quarter_score_ok,
            };
            let parity = boolfn::parity(2)?;
            let cfg = LearnerConfig {
                s: 4,
                eps,
                delta,
                k: 8,
                seed: seed.wrapping_add(trial),
            };
            let (tree, rep) = learn::learn_general(&parity, &cfg)?;
            let edges = LearnBenchRow {
                trial,
                mode: "edges_parity".into(),
                steps: rep.steps,
                true_error: rep.true_error,
                success: tree.size() == 4 && rep.true_error == 0.0,
                quarter_score_ok: rep.quarter_score_ok,
            };
            Ok(vec![mono, edges])
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok(rows)
}

pub fn learn_table(rows: &[LearnBenchRow]) -> Table {
    let mut t = Table::new(&[
        "trial",
        "mode",
        "steps",
        "true_error",
        "success",
        "quarter_score_ok",
    ]);
    for r in rows {
        t.push(vec![
            r.trial.to_string(),
            r.mode.clone(),
            r.steps.to_string(),
            format!("{:.6}", r.true_error),
            r.success.to_string(),
            r.quarter_score_ok.to_string(),
        ]);
    }
    t
}

#[derive(Clone, Debug, Serialize)]
pub struct FindBenchRow {
    pub tree_seed: u64,
    pub n: usize,
    pub s: u64,
    pub d: u32,
    pub sample_error: f64,
    pub error_bound: f64,
    pub within_bound: bool,
    pub peak_frames: u64,
}

/// FIND depth sweep on full samples of random trees; per tree, the error
/// column is weakly decreasing in the depth budget.
pub fn run_find_bench(seed: u64, trees: u64) -> Result<Vec<FindBenchRow>> {
    let rows: Vec<FindBenchRow> = (0..trees)
        .into_par_iter()
        .map(|t| -> Result<Vec<FindBenchRow>> {
            let n = 8usize;
            let s = 16u64;
            let tree = dtree::random_tree(n, s as usize, seed.wrapping_add(t))?;
            let f = dtree::to_truth_table(&tree, n)?;
            let sample = learn::full_support(&f);
            let mut out = Vec::new();
            for d in 0..=n as u32 {
                let view = SampleView::whole(&sample);
                let r = ehfind::find(&view, s, d);
                let fitted = r
                    .tree
                    .ok_or_else(|| Error::InvalidParams("full sample unexpectedly unfit".into()))?;
                let (miss, total) = view.error_against(&fitted);
                let err = miss as f64 / total as f64;
                let bound = 0.25 * 0.75f64.powi(d as i32) * s as f64;
                out.push(FindBenchRow {
                    tree_seed: seed.wrapping_add(t),
                    n,
                    s,
                    d,
                    sample_error: err,
                    error_bound: bound,
                    within_bound: err <= bound,
                    peak_frames: r.counters.peak_frames,
                });
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok(rows)
}

pub fn find_table(rows: &[FindBenchRow]) -> Table {
    let mut t = Table::new(&[
        "tree_seed",
        "n",
        "s",
        "d",
        "sample_error",
        "error_bound",
        "within_bound",
        "peak_frames",
    ]);
    for r in rows {
        t.push(vec![
            r.tree_seed.to_string(),
            r.n.to_string(),
            r.s.to_string(),
            r.d.to_string(),
            format!("{:.6}", r.sample_error),
            format!("{:.6}", r.error_bound),
            r.within_bound.to_string(),
            r.peak_frames.to_string(),
        ]);
    }
    t
}
