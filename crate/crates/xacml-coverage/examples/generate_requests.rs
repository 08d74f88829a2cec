//! Harvest a policy's attribute values and generate the simple and multiple
//! combinatorial request suites, then materialize one suite as XACML files.
//!
//! ```bash
//! cargo run -p xacml-coverage --example generate_requests
//! ```

use xacml_coverage::model::{Category, RequestTuple};
use xacml_coverage::reqgen::{self, Strategy};
use xacml_coverage::xacml_io;

fn fixture(name: &str) -> String {
    let path = format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(path).expect("fixture exists")
}

fn request_text(req: &RequestTuple) -> String {
    let dims: Vec<String> = Category::ALL
        .iter()
        .map(|&c| {
            let values: Vec<&str> = req.dimension(c).iter().map(|v| v.value.as_str()).collect();
            format!("{{{}}}", values.join(", "))
        })
        .collect();
    format!("({})", dims.join(", "))
}

fn main() {
    let ps = xacml_io::parse_policy(&fixture("policy1.xml")).expect("fixture parses");

    let sets = reqgen::harvest(&ps);
    println!("harvested value sets:");
    for &category in &Category::ALL {
        let values: Vec<String> = sets
            .dimension(category)
            .iter()
            .map(|v| format!("{}={}", v.attribute_id, v.value))
            .collect();
        println!("  {category}: {{{}}}", values.join(", "));
    }

    let simple = reqgen::gen_simple(&ps).expect("policy has values");
    println!("\nsimple combinatorial: {} requests", simple.len());
    for req in &simple {
        println!("  {}", request_text(req));
    }

    let multiple = reqgen::gen_multiple(&ps).expect("suite under the cap");
    println!(
        "\nmultiple combinatorial: {} requests, e.g.:",
        multiple.len()
    );
    for req in multiple.iter().skip(37).take(5) {
        println!("  {}", request_text(req));
    }

    let dir = std::env::temp_dir().join("xacml-coverage-example-suite");
    let manifest = reqgen::write_suite(&dir, Strategy::Simple, &simple).expect("writable dir");
    println!(
        "\nwrote {} request files + manifest.json to {}",
        manifest.ids.len(),
        dir.display()
    );
    let first = dir.join(format!("{}.xml", manifest.ids[0]));
    println!("--- {} ---", first.display());
    print!("{}", std::fs::read_to_string(first).unwrap());
}
