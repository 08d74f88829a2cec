//! Coverage-criteria tracing and combinatorial test generation for XACML 2.0
//! access-control policies.
//!
//! The crate parses a subset of XACML 2.0, derives the trace sets of four
//! rule-level coverage criteria, generates test request suites with two
//! combinatorial strategies, evaluates requests with a built-in policy
//! decision point, and measures on-line which traces a test suite covers.
//!
//! The pieces compose into a pipeline (see [`cli::run_cover`]):
//!
//! ```text
//! policy.xml -> tracegen -----------------------> monitor -> report
//!           \-> reqgen -> requests -> pdp -> events --^
//! ```
//!
//! Each stage is usable on its own; the `examples/` directory has one
//! runnable example per capability, and the `xacml-coverage` binary exposes
//! the pipeline as subcommands.

pub mod cli;
pub mod model;
pub mod monitor;
pub mod pdp;
pub mod reqgen;
pub mod tracegen;
pub mod xacml_io;

#[cfg(test)]
pub(crate) mod testutil;

pub use model::{
    AttributeValue, Category, CombiningAlgorithm, ConditionExpr, Decision, Effect, Policy,
    PolicySet, RequestTuple, Rule, TargetTuple,
};
pub use monitor::{CoverageReport, CoverageState, Event};
pub use reqgen::Strategy;
pub use tracegen::{Criterion, Trace, TraceSet};
