//! Command-line orchestration of the assessment pipeline:
//! parse -> derive traces -> generate requests -> evaluate -> monitor ->
//! report.
//!
//! Exit codes: 0 success, 1 usage, 2 parse or i/o, 3 unsupported feature or
//! condition, 4 suite too large.

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::model::PolicySet;
use crate::monitor::{CoverageReport, CoverageState, Event};
use crate::pdp;
use crate::reqgen::{self, ReqGenError, Strategy};
use crate::tracegen::{self, Criterion, TraceGenError, TraceSet};
use crate::xacml_io::{self, XacmlError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_UNSUPPORTED: i32 = 3;
pub const EXIT_SUITE_TOO_LARGE: i32 = 4;

#[derive(Debug, Error)]
pub enum AppError {
    #[error(transparent)]
    Xacml(#[from] XacmlError),
    #[error(transparent)]
    TraceGen(#[from] TraceGenError),
    #[error(transparent)]
    ReqGen(#[from] ReqGenError),
    #[error("invalid trace JSON: {0}")]
    TraceJson(#[from] serde_json::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Xacml(XacmlError::UnsupportedFeature { .. }) => EXIT_UNSUPPORTED,
            AppError::Xacml(_) => EXIT_PARSE,
            AppError::TraceGen(TraceGenError::UnsupportedCondition { .. }) => EXIT_UNSUPPORTED,
            AppError::TraceGen(TraceGenError::UnknownRule { .. }) => EXIT_PARSE,
            AppError::ReqGen(ReqGenError::SuiteTooLarge { .. }) => EXIT_SUITE_TOO_LARGE,
            AppError::ReqGen(_) => EXIT_PARSE,
            AppError::TraceJson(_) | AppError::Io(_) => EXIT_PARSE,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "xacml-coverage",
    version,
    about = "Coverage-criteria tracing and combinatorial test generation for XACML 2.0 policies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Derive the trace set of a coverage criterion from a policy.
    Traces {
        /// Policy file (XACML 2.0).
        policy: PathBuf,
        /// Coverage criterion, or all four.
        #[arg(long, value_enum, default_value_t = CriterionArg::All)]
        criterion: CriterionArg,
        /// Output file for the trace JSON; defaults to standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a combinatorial request suite from a policy.
    Gen {
        /// Policy file (XACML 2.0).
        policy: PathBuf,
        /// Generation strategy.
        #[arg(long, value_enum)]
        strategy: StrategyArg,
        /// Directory for the request files and manifest.
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Evaluate one request against a policy and print the decision.
    Eval {
        /// Policy file (XACML 2.0).
        policy: PathBuf,
        /// Request file (XACML 2.0 context).
        request: PathBuf,
    },
    /// Run the whole pipeline in-process and report coverage.
    Cover {
        /// Policy file (XACML 2.0).
        policy: PathBuf,
        /// Generation strategy.
        #[arg(long, value_enum)]
        strategy: StrategyArg,
        /// Coverage criterion, or all four.
        #[arg(long, value_enum, default_value_t = CriterionArg::All)]
        criterion: CriterionArg,
        /// Output file for the report JSON.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Also write the monitor event stream as JSON lines.
        #[arg(long)]
        dump_events: Option<PathBuf>,
    },
    /// Consume a JSONL event stream against a trace set and report coverage.
    Monitor {
        /// Trace JSON produced by the traces subcommand.
        traces: PathBuf,
        /// Event file (JSON lines); defaults to standard input.
        #[arg(long)]
        events: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CriterionArg {
    Rtt,
    Rtf,
    Rct,
    Rcf,
    All,
}

impl CriterionArg {
    fn criteria(self) -> Vec<Criterion> {
        match self {
            CriterionArg::Rtt => vec![Criterion::RuleTargetTrue],
            CriterionArg::Rtf => vec![Criterion::RuleTargetFalse],
            CriterionArg::Rct => vec![Criterion::RuleConditionTrue],
            CriterionArg::Rcf => vec![Criterion::RuleConditionFalse],
            CriterionArg::All => Criterion::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StrategyArg {
    Simple,
    Multiple,
}

impl From<StrategyArg> for Strategy {
    fn from(arg: StrategyArg) -> Self {
        match arg {
            StrategyArg::Simple => Strategy::Simple,
            StrategyArg::Multiple => Strategy::Multiple,
        }
    }
}

/// Parse the process arguments, run the selected command, and return the
/// process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_OK
            };
            let _ = err.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}

fn dispatch(command: Command) -> Result<(), AppError> {
    match command {
        Command::Traces {
            policy,
            criterion,
            out,
        } => cmd_traces(&policy, criterion, out.as_deref()),
        Command::Gen {
            policy,
            strategy,
            out_dir,
        } => cmd_gen(&policy, strategy.into(), &out_dir),
        Command::Eval { policy, request } => cmd_eval(&policy, &request),
        Command::Cover {
            policy,
            strategy,
            criterion,
            report,
            dump_events,
        } => cmd_cover(
            &policy,
            strategy.into(),
            criterion,
            report.as_deref(),
            dump_events.as_deref(),
        ),
        Command::Monitor { traces, events } => cmd_monitor(&traces, events.as_deref()),
    }
}

fn generate_trace_sets(
    ps: &PolicySet,
    criteria: &[Criterion],
) -> Result<Vec<TraceSet>, TraceGenError> {
    criteria
        .iter()
        .map(|&c| tracegen::gen_criterion(ps, c))
        .collect()
}

fn cmd_traces(
    policy_path: &Path,
    criterion: CriterionArg,
    out: Option<&Path>,
) -> Result<(), AppError> {
    let doc = xacml_io::load_policy(policy_path)?;
    let json = match criterion {
        CriterionArg::All => serde_json::to_string_pretty(&tracegen::gen_all(&doc.root)?)?,
        one => {
            let set = tracegen::gen_criterion(&doc.root, one.criteria()[0])?;
            serde_json::to_string_pretty(&set)?
        }
    };
    match out {
        Some(path) => std::fs::write(path, json + "\n")?,
        None => println!("{json}"),
    }
    Ok(())
}

fn cmd_gen(policy_path: &Path, strategy: Strategy, out_dir: &Path) -> Result<(), AppError> {
    let doc = xacml_io::load_policy(policy_path)?;
    let suite = reqgen::generate(&doc.root, strategy)?;
    let manifest = reqgen::write_suite(out_dir, strategy, &suite)?;
    println!(
        "wrote {} {} requests to {}",
        manifest.ids.len(),
        strategy,
        out_dir.display()
    );
    Ok(())
}

fn cmd_eval(policy_path: &Path, request_path: &Path) -> Result<(), AppError> {
    let policy = xacml_io::load_policy(policy_path)?;
    let request = xacml_io::load_request(request_path)?;
    println!("{}", pdp::evaluate(&policy.root, &request.tuple));
    Ok(())
}

/// Outcome of an in-process pipeline run: the final report plus the exact
/// event stream the monitor consumed.
#[derive(Debug, Clone)]
pub struct CoverRun {
    pub report: CoverageReport,
    pub events: Vec<Event>,
    pub suite_size: usize,
}

/// Run generation, evaluation, and monitoring in one process: the library
/// entry point behind the cover subcommand.
pub fn run_cover(
    ps: &PolicySet,
    strategy: Strategy,
    criteria: &[Criterion],
) -> Result<CoverRun, AppError> {
    let sets = generate_trace_sets(ps, criteria)?;
    let suite = reqgen::generate(ps, strategy)?;
    let mut state = CoverageState::new(sets);
    let mut events = Vec::with_capacity(suite.len() * 2);
    for (index, tuple) in suite.iter().enumerate() {
        let id = reqgen::request_id(strategy, index);
        let decision = pdp::evaluate(ps, tuple);
        let request = Event::Request {
            id: id.clone(),
            tuple: tuple.clone(),
        };
        let response = Event::Response { id, decision };
        state
            .ingest(request.clone())
            .expect("suite request ids are unique");
        state
            .ingest(response.clone())
            .expect("every response follows its request");
        events.push(request);
        events.push(response);
    }
    Ok(CoverRun {
        report: state.report(),
        events,
        suite_size: suite.len(),
    })
}

fn cmd_cover(
    policy_path: &Path,
    strategy: Strategy,
    criterion: CriterionArg,
    report_path: Option<&Path>,
    dump_events: Option<&Path>,
) -> Result<(), AppError> {
    let doc = xacml_io::load_policy(policy_path)?;
    let run = run_cover(&doc.root, strategy, &criterion.criteria())?;
    if let Some(path) = dump_events {
        let mut out = std::fs::File::create(path)?;
        for event in &run.events {
            writeln!(out, "{}", serde_json::to_string(event)?)?;
        }
    }
    if let Some(path) = report_path {
        let json = serde_json::to_string_pretty(&run.report)?;
        std::fs::write(path, json + "\n")?;
    }
    let title = match strategy {
        Strategy::Simple => format!("Simple Combinatorial ({})", run.suite_size),
        Strategy::Multiple => format!("Multiple Combinatorial ({})", run.suite_size),
    };
    print!("{}", run.report.render_table(&title));
    Ok(())
}

fn cmd_monitor(traces_path: &Path, events_path: Option<&Path>) -> Result<(), AppError> {
    let sets = tracegen::parse_trace_sets(&std::fs::read_to_string(traces_path)?)?;
    let mut state = CoverageState::new(sets);

    let stdin = std::io::stdin();
    let reader: Box<dyn BufRead> = match events_path {
        Some(path) => Box::new(std::io::BufReader::new(std::fs::File::open(path)?)),
        None => Box::new(stdin.lock()),
    };

    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let event: Event = match serde_json::from_str(&line) {
            Ok(event) => event,
            Err(err) => {
                eprintln!("warning: skipping malformed event line: {err}");
                state.note_skipped();
                continue;
            }
        };
        match state.ingest(event) {
            Ok(Some(report)) => println!("{}", serde_json::to_string(&report)?),
            Ok(None) => {}
            Err(err) => {
                eprintln!("warning: skipping event: {err}");
                state.note_skipped();
            }
        }
    }

    let report = state.report();
    println!("{}", serde_json::to_string(&report)?);
    eprint!("{}", report.render_table("Coverage"));
    Ok(())
}
