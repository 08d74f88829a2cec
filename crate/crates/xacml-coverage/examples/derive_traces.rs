//! Derive the trace sets of all four coverage criteria from a policy and
//! print them in set notation, one line per trace.
//!
//! ```bash
//! cargo run -p xacml-coverage --example derive_traces
//! ```

use xacml_coverage::model::Category;
use xacml_coverage::tracegen::{self, ConstraintLiteral, DimensionConstraint, Trace};
use xacml_coverage::xacml_io;

fn fixture(name: &str) -> String {
    let path = format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(path).expect("fixture exists")
}

fn literal_text(literal: &ConstraintLiteral) -> String {
    match literal {
        ConstraintLiteral::RequireOneOf(set) => {
            let values: Vec<&str> = set.iter().map(|v| v.value.as_str()).collect();
            format!("{{{}}}", values.join(" v "))
        }
        ConstraintLiteral::ForbidAllOf(set) => {
            let values: Vec<String> = set.iter().map(|v| format!("!={}", v.value)).collect();
            format!("{{{}}}", values.join(" ^ "))
        }
    }
}

fn dimension_text(dim: &DimensionConstraint) -> String {
    if dim.is_any() {
        return "*".to_owned();
    }
    dim.literals
        .iter()
        .map(literal_text)
        .collect::<Vec<_>>()
        .join(" ^ ")
}

fn trace_line(trace: &Trace) -> String {
    let levels: Vec<String> = trace
        .chain
        .iter()
        .map(|level| {
            let dims: Vec<String> = Category::ALL
                .iter()
                .map(|&c| dimension_text(level.dim(c)))
                .collect();
            format!("({})", dims.join(", "))
        })
        .collect();
    let effect = trace
        .effect
        .map(|e| e.to_string())
        .unwrap_or_else(|| "-".to_owned());
    format!(
        "{:<5} [{}] {} {effect}",
        trace.id,
        trace.rule_id,
        levels.join(" ")
    )
}

fn main() {
    let ps = xacml_io::parse_policy(&fixture("policy1.xml")).expect("fixture parses");
    for set in tracegen::gen_all(&ps).expect("supported conditions") {
        println!("{} ({} traces)", set.criterion, set.traces.len());
        for trace in &set.traces {
            println!("  {}", trace_line(trace));
        }
        println!();
    }

    // The single-criterion generators are available on their own, and each
    // trace set serializes to JSON for the monitor.
    let rcf = tracegen::gen_rcf(&ps).expect("supported conditions");
    println!("condition-false set as JSON:");
    println!("{}", serde_json::to_string_pretty(&rcf).unwrap());

    // Every trace is satisfiable; the generator can prove it with a witness.
    for trace in &rcf.traces {
        let witness = tracegen::witness_request(trace).expect("trace is satisfiable");
        let subjects: Vec<&str> = witness.subjects.iter().map(|v| v.value.as_str()).collect();
        println!(
            "witness for {}: subjects {{{}}} cover the chain",
            trace.id,
            subjects.join(", ")
        );
    }
}
