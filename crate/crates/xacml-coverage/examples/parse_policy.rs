//! Parse a policy file and walk the resulting model: targets per level,
//! rules, conditions, and combining algorithms.
//!
//! ```bash
//! cargo run -p xacml-coverage --example parse_policy
//! ```

use xacml_coverage::model::{Category, ConditionExpr, PolicySet, TargetTuple};
use xacml_coverage::xacml_io;

fn fixture(name: &str) -> String {
    let path = format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(path).expect("fixture exists")
}

fn describe_target(target: &TargetTuple) -> String {
    if target.is_any() {
        return "any".to_owned();
    }
    Category::ALL
        .iter()
        .filter(|&&c| !target.dimension(c).is_empty())
        .map(|&c| {
            let values: Vec<&str> = target
                .dimension(c)
                .iter()
                .map(|v| v.value.as_str())
                .collect();
            format!("{c} in {{{}}}", values.join(", "))
        })
        .collect::<Vec<_>>()
        .join(" and ")
}

fn describe_condition(condition: &ConditionExpr) -> String {
    match condition {
        ConditionExpr::And(items) => items
            .iter()
            .map(describe_condition)
            .collect::<Vec<_>>()
            .join(" and "),
        ConditionExpr::Or(items) => format!(
            "({})",
            items
                .iter()
                .map(describe_condition)
                .collect::<Vec<_>>()
                .join(" or ")
        ),
        ConditionExpr::Not(inner) => format!("not {}", describe_condition(inner)),
        ConditionExpr::Predicate(v) => format!("{} = {}", v.attribute_id, v.value),
    }
}

fn print_policy_set(ps: &PolicySet) {
    println!(
        "policy set `{}` (target: {})",
        ps.id,
        describe_target(&ps.target)
    );
    for policy in &ps.policies {
        println!(
            "  policy `{}` [{:?}] (target: {})",
            policy.id,
            policy.rule_combining,
            describe_target(&policy.target)
        );
        for rule in &policy.rules {
            let condition = rule
                .condition
                .as_ref()
                .map(|c| format!(" when {}", describe_condition(c)))
                .unwrap_or_default();
            println!(
                "    rule `{}` -> {} if {}{}",
                rule.id,
                rule.effect,
                describe_target(&rule.target),
                condition
            );
        }
    }
}

fn main() {
    for name in ["policy1.xml", "policy2.xml", "multi_resource.xml"] {
        println!("=== {name} ===");
        let ps = xacml_io::parse_policy(&fixture(name)).expect("fixture parses");
        print_policy_set(&ps);
        println!();
    }

    // Unsupported constructs fail loudly instead of skewing the model.
    let bad = r#"<?xml version="1.0"?>
<Policy xmlns="urn:oasis:names:tc:xacml:2.0:policy:schema:os" PolicyId="p"
        RuleCombiningAlgId="urn:oasis:names:tc:xacml:1.0:rule-combining-algorithm:first-applicable">
  <Rule RuleId="r" Effect="Permit">
    <Condition>
      <Apply FunctionId="urn:oasis:names:tc:xacml:1.0:function:integer-add"/>
    </Condition>
  </Rule>
</Policy>"#;
    println!("parsing a policy with an arithmetic condition:");
    println!("  {}", xacml_io::parse_policy(bad).unwrap_err());
}
