//! Exact analysis of boolean functions on `{0,1}^n` and the top-down
//! decision-tree induction loop built on it.
//!
//! The crate keeps every probability as an exact dyadic rational and works on
//! explicit truth tables (up to 26 variables), which makes influence,
//! variance, cost and completion-error computations bit-exact. On top of that
//! substrate it provides:
//!
//! * [`boolfn`] — truth tables, restrictions, influence/variance/correlation
//!   statistics, and generators for parity, majority, threshold, Tribes and
//!   the composed function families used by the experiment harness;
//! * [`dtree`] — decision trees, bare (unlabeled) trees, completions, cost,
//!   and a brute-force optimal-tree oracle;
//! * [`topdown`] — the greedy top-down builder with pluggable splitting
//!   criteria (influence, correlation, impurity functions) and full traces;
//! * [`learn`] — sampling oracles and score-estimation learners;
//! * [`ehfind`] — the depth-budgeted recursive FIND fitter,
//!   well-distributed-sample machinery, and the end-to-end proper learner;
//! * [`expt`] — the experiment harness behind the CLI.

pub mod boolfn;
pub mod dtree;
pub mod dyadic;
pub mod ehfind;
pub mod error;
pub mod expt;
pub mod frac;
pub mod learn;
pub mod topdown;

pub use dyadic::Dyadic;
pub use error::Error;
pub use frac::Frac;
