//! Command-line front end: building trees, querying the oracle, running the
//! learners and FIND, and reproducing the experiment tables.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use topdown_dt::boolfn::{self, FamilyParams, Layout, TruthTable};
use topdown_dt::dtree;
use topdown_dt::ehfind::{self, SampleView};
use topdown_dt::error::Error;
use topdown_dt::expt::{self, CheckConfig, ExactFamily, ExperimentSpec, OutputFormat};
use topdown_dt::frac::Frac;
use topdown_dt::learn::{self, LearnerConfig};
use topdown_dt::topdown::{self, BuildOptions, SplitCriterion};

#[derive(Parser)]
#[command(
    name = "topdown-dt",
    version,
    about = "Top-down decision-tree induction workbench"
)]
struct Cli {
    /// Base RNG seed for seeded verbs.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Table output format.
    #[arg(long, global = true, default_value = "csv")]
    format: String,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Args)]
struct TargetArgs {
    /// Generated target, e.g. `parity:k=2`, `majority:k=3`,
    /// `threshold:l=3,t=1`, `tribes:r=4`,
    /// `tribes-biased:l=4,delta=1/4,side=delta`, `exact-nonmonotone:h=2`,
    /// `exact-monotone:h=1`, `approx-nonmonotone:h=1,l=2,k=2,r=4`,
    /// `approx-monotone:h=1,l=2,k=3,r=4,delta=1/4`,
    /// `random-tree:n=8,s=16,seed=3`, `random-monotone:n=8,seed=3`.
    #[arg(long)]
    family: Option<String>,
    /// Truth-table file (header `n=<int>`, then hex digits).
    #[arg(long)]
    tt_file: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Verb {
    /// Run the top-down builder and print a summary (optionally the trace).
    Build {
        #[command(flatten)]
        target: TargetArgs,
        #[arg(long, default_value = "influence")]
        criterion: String,
        /// Accuracy as a rational, e.g. `1/8`; `0` builds exactly.
        #[arg(long, default_value = "0")]
        eps: String,
        /// Leaf budget.
        #[arg(long)]
        budget: Option<u64>,
        /// Write the trace as JSON lines.
        #[arg(long)]
        trace_out: Option<PathBuf>,
        /// Write the target's coordinate-layout descriptor as JSON
        /// (generated families only).
        #[arg(long)]
        layout_out: Option<PathBuf>,
    },
    /// Exact optimal size and depth of a target (n ≤ 16).
    Oracle {
        #[command(flatten)]
        target: TargetArgs,
    },
    /// Run seeded learner trials; one JSON report line per trial.
    Learn {
        #[command(flatten)]
        target: TargetArgs,
        /// `monotone` (random examples) or `edges` (random edge samples).
        #[arg(long, default_value = "monotone")]
        mode: String,
        #[arg(long, default_value = "1/10")]
        eps: String,
        #[arg(long, default_value = "1/10")]
        delta: String,
        #[arg(long, default_value_t = 10)]
        trials: u64,
        /// Size bound fed to the sample-size formula.
        #[arg(long, default_value_t = 16)]
        size_bound: u64,
        /// Step budget.
        #[arg(long, default_value_t = 64)]
        steps: u64,
    },
    /// Fit a sample file with a size- and depth-budgeted tree.
    Find {
        #[arg(long)]
        sample_file: PathBuf,
        #[arg(long)]
        size: u64,
        #[arg(long)]
        depth: u32,
    },
    /// End-to-end proper learner on a known target.
    ProperLearn {
        #[command(flatten)]
        target: TargetArgs,
        #[arg(long)]
        size_bound: u64,
        #[arg(long, default_value = "1/10")]
        eps: String,
        #[arg(long, default_value = "1/10")]
        delta: String,
    },
    /// Exact-representation separation table.
    SeparationExact {
        #[arg(long, default_value = "nonmonotone")]
        family: String,
        #[arg(long, default_value_t = 4)]
        h_max: usize,
    },
    /// Approximate-representation separation table with gateway counts.
    SeparationApprox {
        #[arg(long, default_value = "nonmonotone")]
        family: String,
        #[arg(long, default_value_t = 2)]
        h: usize,
        #[arg(long, default_value_t = 2)]
        ell: usize,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 4)]
        r: usize,
        /// Bias target for the monotone family.
        #[arg(long, default_value = "1/4")]
        delta_bias: String,
        #[arg(long, default_value = "0")]
        eps: String,
    },
    /// Built sizes per target × criterion.
    ImpurityCompare {
        #[arg(long, default_value_t = 5)]
        monotone_targets: usize,
    },
    /// Run the full property corpus; exit 1 on any failure.
    Check {
        #[arg(long, default_value_t = 500)]
        tree_corpus: usize,
        #[arg(long, default_value_t = 500)]
        monotone_corpus: usize,
        #[arg(long, default_value_t = 100)]
        prefix_corpus: usize,
        /// Deliberately misalign a checked quantity to prove the harness
        /// detects violations (forces exit 1).
        #[arg(long, default_value_t = false)]
        inject_bug: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn parse_kv(s: &str) -> Vec<(String, String)> {
    s.split(',')
        .filter(|p| !p.is_empty())
        .map(|p| match p.split_once('=') {
            Some((k, v)) => (k.trim().to_string(), v.trim().to_string()),
            None => (String::new(), p.trim().to_string()),
        })
        .collect()
}

fn kv_get<T: std::str::FromStr>(kv: &[(String, String)], key: &str) -> Result<Option<T>, Error>
where
    T::Err: std::fmt::Display,
{
    match kv
        .iter()
        .find(|(k, _)| k == key || (k.is_empty() && kv.len() == 1))
    {
        Some((_, v)) => v
            .parse::<T>()
            .map(Some)
            .map_err(|e| Error::InvalidParams(format!("bad value for {key}: {e}"))),
        None => Ok(None),
    }
}

fn parse_family(spec: &str) -> Result<(TruthTable, Option<Layout>), Error> {
    let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let kv = parse_kv(rest);
    let need = |opt: Option<usize>, what: &str| {
        opt.ok_or_else(|| Error::InvalidParams(format!("family {name} needs {what}")))
    };
    match name {
        "parity" => Ok((boolfn::parity(need(kv_get(&kv, "k")?, "k")?)?, None)),
        "majority" => Ok((boolfn::majority(need(kv_get(&kv, "k")?, "k")?)?, None)),
        "threshold" => {
            let ell = need(kv_get(&kv, "l")?, "l")?;
            let t = need(kv_get(&kv, "t")?, "t")?;
            Ok((boolfn::threshold(ell, t)?, None))
        }
        "tribes" => Ok((boolfn::tribes(need(kv_get(&kv, "r")?, "r")?)?.0, None)),
        "tribes-biased" => {
            let ell = need(kv_get(&kv, "l")?, "l")?;
            let delta: Frac = kv_get(&kv, "delta")?
                .ok_or_else(|| Error::InvalidParams("tribes-biased needs delta".into()))?;
            let side = match kv_get::<String>(&kv, "side")?.as_deref() {
                None | Some("delta") => boolfn::TribesSide::Delta,
                Some("one-minus-delta") => boolfn::TribesSide::OneMinusDelta,
                Some(other) => return Err(Error::InvalidParams(format!("unknown side {other:?}"))),
            };
            Ok((
                boolfn::tribes_biased(ell, (delta.num, delta.den), side)?.0,
                None,
            ))
        }
        "exact-nonmonotone" => {
            let (f, layout) = boolfn::family_exact_nonmonotone(need(kv_get(&kv, "h")?, "h")?)?;
            Ok((f, Some(layout)))
        }
        "exact-monotone" => {
            let (f, layout) = boolfn::family_exact_monotone(need(kv_get(&kv, "h")?, "h")?)?;
            Ok((f, Some(layout)))
        }
        "approx-nonmonotone" | "approx-monotone" => {
            let delta: Frac = kv_get(&kv, "delta")?.unwrap_or(Frac { num: 1, den: 4 });
            let p = FamilyParams {
                h: need(kv_get(&kv, "h")?, "h")?,
                ell: need(kv_get(&kv, "l")?, "l")?,
                k: need(kv_get(&kv, "k")?, "k")?,
                r: need(kv_get(&kv, "r")?, "r")?,
                delta: (delta.num, delta.den),
            };
            let (f, layout) = if name == "approx-nonmonotone" {
                boolfn::family_approx_nonmonotone(&p)?
            } else {
                boolfn::family_approx_monotone(&p)?
            };
            Ok((f, Some(layout)))
        }
        "random-tree" => {
            let n = need(kv_get(&kv, "n")?, "n")?;
            let s = need(kv_get(&kv, "s")?, "s")?;
            let seed = kv_get(&kv, "seed")?.unwrap_or(0u64);
            Ok((boolfn::random_tree_function(n, s, seed)?, None))
        }
        "random-monotone" => {
            let n = need(kv_get(&kv, "n")?, "n")?;
            let seed = kv_get(&kv, "seed")?.unwrap_or(0u64);
            Ok((boolfn::random_monotone_function(n, seed)?, None))
        }
        other => Err(Error::InvalidParams(format!("unknown family {other:?}"))),
    }
}

fn load_target(t: &TargetArgs) -> Result<(TruthTable, Option<Layout>), Error> {
    match (&t.family, &t.tt_file) {
        (Some(spec), None) => parse_family(spec),
        (None, Some(path)) => {
            let f = boolfn::read_truth_table(BufReader::new(File::open(path)?))?;
            Ok((f, None))
        }
        _ => Err(Error::InvalidParams(
            "give exactly one of --family or --tt-file".into(),
        )),
    }
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), Error> {
    match out {
        Some(path) => {
            let mut f = File::create(path)?;
            f.write_all(content.as_bytes())?;
            Ok(())
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    let format: OutputFormat = cli.format.parse()?;
    match cli.verb {
        Verb::Build {
            target,
            criterion,
            eps,
            budget,
            trace_out,
            layout_out,
        } => {
            let (f, layout) = load_target(&target)?;
            if let Some(path) = layout_out {
                let layout = layout.ok_or_else(|| {
                    Error::InvalidParams("target has no layout descriptor".into())
                })?;
                boolfn::write_layout(File::create(path)?, &layout)?;
            }
            let criterion: SplitCriterion = criterion.parse()?;
            let eps: Frac = eps.parse()?;
            let mut opts = BuildOptions::new(criterion, eps)?;
            if let Some(b) = budget {
                opts = opts.with_budget(b)?;
            }
            let built = topdown::build_top_down(&f, &opts)?;
            if let Some(path) = trace_out {
                let mut w = File::create(path)?;
                topdown::write_trace_jsonl(&mut w, &built.trace)?;
            }
            let summary = json!({
                "criterion": built.trace.criterion,
                "eps": eps.to_string(),
                "size": built.tree.size(),
                "depth": built.tree.depth(),
                "steps": built.trace.steps.len(),
                "termination": built.trace.termination,
                "final_error": built.trace.final_error.to_string(),
                "tree": serde_json::from_str::<serde_json::Value>(
                    &dtree::serialize_tree(&built.tree)).expect("tree json"),
            });
            emit(
                &cli.out,
                &format!("{}\n", serde_json::to_string_pretty(&summary).unwrap()),
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Verb::Oracle { target } => {
            let (f, _) = load_target(&target)?;
            let size = dtree::optimal_size(&f)?;
            let depth = dtree::optimal_depth(&f)?;
            emit(&cli.out, &format!("size {size}\ndepth {depth}\n"))?;
            Ok(ExitCode::SUCCESS)
        }
        Verb::Learn {
            target,
            mode,
            eps,
            delta,
            trials,
            size_bound,
            steps,
        } => {
            let (f, _) = load_target(&target)?;
            let eps: Frac = eps.parse()?;
            let delta: Frac = delta.parse()?;
            let mut lines = String::new();
            for trial in 0..trials {
                let cfg = LearnerConfig {
                    s: size_bound,
                    eps,
                    delta,
                    k: steps,
                    seed: cli.seed.wrapping_add(trial),
                };
                let (tree, report) = match mode.as_str() {
                    "monotone" => learn::learn_monotone(&f, &cfg)?,
                    "edges" => learn::learn_general(&f, &cfg)?,
                    other => return Err(Error::InvalidParams(format!("unknown mode {other:?}"))),
                };
                let mut line = serde_json::to_value(&report).expect("report json");
                line["trial"] = json!(trial);
                line["size"] = json!(tree.size());
                lines.push_str(&serde_json::to_string(&line).expect("line json"));
                lines.push('\n');
            }
            emit(&cli.out, &lines)?;
            Ok(ExitCode::SUCCESS)
        }
        Verb::Find {
            sample_file,
            size,
            depth,
        } => {
            let sample = ehfind::read_sample(BufReader::new(File::open(&sample_file)?))?;
            let view = SampleView::whole(&sample);
            let result = ehfind::find(&view, size, depth);
            let doc = match &result.tree {
                Some(tree) => {
                    let (miss, total) = view.error_against(tree);
                    json!({
                        "fit": true,
                        "size": tree.size(),
                        "depth": tree.depth(),
                        "sample_error": miss as f64 / total.max(1) as f64,
                        "counters": result.counters,
                        "tree": serde_json::from_str::<serde_json::Value>(
                            &dtree::serialize_tree(tree)).expect("tree json"),
                    })
                }
                None => json!({ "fit": false, "counters": result.counters }),
            };
            emit(
                &cli.out,
                &format!("{}\n", serde_json::to_string_pretty(&doc).unwrap()),
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Verb::ProperLearn {
            target,
            size_bound,
            eps,
            delta,
        } => {
            let (f, _) = load_target(&target)?;
            let eps: Frac = eps.parse()?;
            let delta: Frac = delta.parse()?;
            let (tree, report) = ehfind::learn_proper(&f, size_bound, eps, delta, cli.seed)?;
            let mut doc = serde_json::to_value(&report).expect("report json");
            if let Some(tree) = tree {
                doc["tree_size"] = json!(tree.size());
            }
            emit(
                &cli.out,
                &format!("{}\n", serde_json::to_string_pretty(&doc).unwrap()),
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Verb::SeparationExact { family, h_max } => {
            let fam: ExactFamily = family.parse()?;
            let rows = expt::run_separation_exact(fam, h_max)?;
            let spec = ExperimentSpec::new(
                "separation-exact",
                json!({"family": family, "h_max": h_max}),
                cli.seed,
            );
            emit(
                &cli.out,
                &expt::separation_table(&rows).render(&spec, format),
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Verb::SeparationApprox {
            family,
            h,
            ell,
            k,
            r,
            delta_bias,
            eps,
        } => {
            let fam: ExactFamily = family.parse()?;
            let delta: Frac = delta_bias.parse()?;
            let eps: Frac = eps.parse()?;
            let params = FamilyParams {
                h,
                ell,
                k,
                r,
                delta: (delta.num, delta.den),
            };
            let rows = expt::run_separation_approx(fam, &params, eps)?;
            let spec = ExperimentSpec::new(
                "separation-approx",
                json!({
                    "family": family, "h": h, "ell": ell, "k": k, "r": r,
                    "delta": delta.to_string(), "eps": eps.to_string(),
                }),
                cli.seed,
            );
            emit(&cli.out, &expt::approx_table(&rows).render(&spec, format))?;
            Ok(ExitCode::SUCCESS)
        }
        Verb::ImpurityCompare { monotone_targets } => {
            let rows = expt::run_impurity_compare(cli.seed, monotone_targets)?;
            let spec = ExperimentSpec::new(
                "impurity-compare",
                json!({"monotone_targets": monotone_targets}),
                cli.seed,
            );
            emit(&cli.out, &expt::impurity_table(&rows).render(&spec, format))?;
            Ok(ExitCode::SUCCESS)
        }
        Verb::Check {
            tree_corpus,
            monotone_corpus,
            prefix_corpus,
            inject_bug,
        } => {
            let cfg = CheckConfig {
                seed: cli.seed,
                tree_corpus,
                monotone_corpus,
                prefix_corpus,
                inject_bug,
            };
            let report = expt::run_bound_checks(&cfg)?;
            let spec = ExperimentSpec::new(
                "check",
                json!({
                    "tree_corpus": tree_corpus, "monotone_corpus": monotone_corpus,
                    "prefix_corpus": prefix_corpus, "inject_bug": inject_bug,
                }),
                cli.seed,
            );
            emit(&cli.out, &expt::check_table(&report).render(&spec, format))?;
            if report.all_pass {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(1))
            }
        }
    }
}
