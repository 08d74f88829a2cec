//! Evaluate requests against a policy with the built-in decision point:
//! the bundled request files first, then constructed tuples, then the same
//! decisions rendered as XACML response documents.
//!
//! ```bash
//! cargo run -p xacml-coverage --example evaluate_requests
//! ```

use xacml_coverage::model::{AttributeValue, Category, RequestTuple};
use xacml_coverage::pdp;
use xacml_coverage::xacml_io;

fn fixture(name: &str) -> String {
    let path = format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(path).expect("fixture exists")
}

fn main() {
    let ps = xacml_io::parse_policy(&fixture("policy1.xml")).expect("fixture parses");

    for name in [
        "request_julius_write.xml",
        "request_julius_professor_write.xml",
    ] {
        let request = xacml_io::parse_request(&fixture(name)).expect("request parses");
        println!("{name}: {}", pdp::evaluate(&ps, &request));
    }

    let subject = |id: &str, v: &str| AttributeValue::new(Category::Subject, id, v);
    let resource = |v: &str| AttributeValue::new(Category::Resource, "resource-id", v);
    let action = |v: &str| AttributeValue::new(Category::Action, "action-id", v);

    let cases = [
        (
            "a professor reads books",
            RequestTuple::from_values([
                subject("role", "professor"),
                resource("books"),
                action("read"),
            ]),
        ),
        (
            "a professor writes books (default rule)",
            RequestTuple::from_values([
                subject("role", "professor"),
                resource("books"),
                action("write"),
            ]),
        ),
        (
            "journal access (outside the policy target)",
            RequestTuple::from_values([
                subject("subject-id", "x"),
                resource("journal"),
                action("read"),
            ]),
        ),
    ];
    for (label, request) in &cases {
        println!("{label}: {}", pdp::evaluate(&ps, request));
    }

    // Decisions serialize as XACML response documents.
    let decision = pdp::evaluate(&ps, &cases[0].1);
    println!(
        "\nas a response document:\n{}",
        xacml_io::emit_response(decision)
    );
}
