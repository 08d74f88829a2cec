//! Drive the coverage monitor one event at a time, the way an external test
//! executor and decision point would over the JSONL protocol: requests park
//! a tuple, responses mark covered traces, flushes yield interim reports.
//!
//! ```bash
//! cargo run -p xacml-coverage --example monitor_stream
//! ```

use xacml_coverage::model::Decision;
use xacml_coverage::monitor::{CoverageState, Event};
use xacml_coverage::pdp;
use xacml_coverage::reqgen::{self, Strategy};
use xacml_coverage::tracegen;
use xacml_coverage::xacml_io;

fn fixture(name: &str) -> String {
    let path = format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(path).expect("fixture exists")
}

fn main() {
    let ps = xacml_io::parse_policy(&fixture("policy1.xml")).expect("fixture parses");
    let sets = tracegen::gen_all(&ps).expect("supported conditions");
    let mut state = CoverageState::new(sets);

    let suite = reqgen::gen_simple(&ps).expect("policy has values");
    println!("streaming {} request/response pairs:", suite.len());
    for (index, tuple) in suite.iter().enumerate() {
        let id = reqgen::request_id(Strategy::Simple, index);
        let decision = pdp::evaluate(&ps, tuple);

        // The JSONL wire format, as an external executor would send it.
        let request = Event::Request {
            id: id.clone(),
            tuple: tuple.clone(),
        };
        println!("> {}", serde_json::to_string(&request).unwrap());
        state.ingest(request).expect("fresh request id");
        let response = Event::Response {
            id: id.clone(),
            decision,
        };
        println!("> {}", serde_json::to_string(&response).unwrap());
        state.ingest(response).expect("paired response");

        if index == 2 {
            let interim = state
                .ingest(Event::Flush)
                .expect("flush never fails")
                .expect("flush yields a report");
            println!("\ninterim report after 3 pairs:");
            print!("{}", interim.render_table("Coverage"));
            println!();
        }
    }

    // A response without a pending request is an error the caller decides
    // how to handle; the command-line monitor skips and counts it.
    let orphan = state.ingest(Event::Response {
        id: "unknown".into(),
        decision: Decision::Permit,
    });
    println!("orphan response -> {}\n", orphan.unwrap_err());

    let report = state.report();
    println!("final report:");
    print!("{}", report.render_table("Simple Combinatorial (6)"));
    println!(
        "\nas JSON:\n{}",
        serde_json::to_string_pretty(&report).unwrap()
    );
}
