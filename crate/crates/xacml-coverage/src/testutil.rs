//! In-memory equivalents of the bundled fixture policies, shared by the
//! module tests.

use crate::model::{
    AttributeValue, Category, CombiningAlgorithm, ConditionExpr, Effect, Policy, PolicySet,
    RequestTuple, Rule, TargetTuple,
};

pub fn subj(value: &str) -> AttributeValue {
    AttributeValue::new(Category::Subject, "subject-id", value)
}

pub fn role(value: &str) -> AttributeValue {
    AttributeValue::new(Category::Subject, "role", value)
}

pub fn res(value: &str) -> AttributeValue {
    AttributeValue::new(Category::Resource, "resource-id", value)
}

pub fn act(value: &str) -> AttributeValue {
    AttributeValue::new(Category::Action, "action-id", value)
}

pub fn target(values: impl IntoIterator<Item = AttributeValue>) -> TargetTuple {
    let mut t = TargetTuple::any();
    for v in values {
        t.insert(v);
    }
    t
}

pub fn request(values: impl IntoIterator<Item = AttributeValue>) -> RequestTuple {
    RequestTuple::from_values(values)
}

fn library_policy_set(id: &str, conditioned_subject: &str) -> PolicySet {
    let role_condition = ConditionExpr::Or(vec![
        ConditionExpr::Predicate(role("professor")),
        ConditionExpr::Predicate(role("administrator")),
    ]);
    PolicySet {
        id: id.into(),
        target: TargetTuple::any(),
        policies: vec![Policy {
            id: "library-policy".into(),
            target: target([res("books")]),
            rules: vec![
                Rule {
                    id: "ruleA".into(),
                    target: target([res("books"), act("read")]),
                    condition: None,
                    effect: Effect::Permit,
                },
                Rule {
                    id: "ruleB".into(),
                    target: target([subj("Julius"), res("books"), act("write")]),
                    condition: None,
                    effect: Effect::Deny,
                },
                Rule {
                    id: "ruleC".into(),
                    target: target([subj(conditioned_subject), res("books"), act("write")]),
                    condition: Some(role_condition),
                    effect: Effect::Permit,
                },
                Rule {
                    id: "default".into(),
                    target: TargetTuple::any(),
                    condition: None,
                    effect: Effect::Deny,
                },
            ],
            rule_combining: CombiningAlgorithm::PermitOverrides,
        }],
        policy_combining: CombiningAlgorithm::PermitOverrides,
    }
}

/// The library policy: the conditioned write exception names the same
/// subject as the blanket deny.
pub fn policy1() -> PolicySet {
    library_policy_set("library-access", "Julius")
}

/// The revised library policy: the conditioned write exception names Marc.
pub fn policy2() -> PolicySet {
    library_policy_set("library-access-v2", "Marc")
}

/// A policy whose conditioned rule is reachable only by requests carrying
/// two resource values at once (one per enclosure level).
pub fn multi_resource_policy() -> PolicySet {
    PolicySet {
        id: "report-archive".into(),
        target: TargetTuple::any(),
        policies: vec![Policy {
            id: "report-archive-policy".into(),
            target: target([res("reports")]),
            rules: vec![
                Rule {
                    id: "archiveRule".into(),
                    target: target([res("archive")]),
                    condition: Some(ConditionExpr::Or(vec![
                        ConditionExpr::Predicate(role("auditor")),
                        ConditionExpr::Predicate(role("manager")),
                    ])),
                    effect: Effect::Permit,
                },
                Rule {
                    id: "default".into(),
                    target: TargetTuple::any(),
                    condition: None,
                    effect: Effect::Deny,
                },
            ],
            rule_combining: CombiningAlgorithm::PermitOverrides,
        }],
        policy_combining: CombiningAlgorithm::PermitOverrides,
    }
}
