//! Policy Decision Point: evaluate a request tuple against a policy set.
//!
//! Conditions are two-valued in the supported subset, so evaluation never
//! produces `Indeterminate`; `NotApplicable` propagates upward when no rule
//! or policy applies.

use crate::model::{CombiningAlgorithm, Decision, Policy, PolicySet, RequestTuple, Rule};

/// A rule applies when its target matches and its condition (if any) holds;
/// it then yields its effect, otherwise `NotApplicable`.
pub fn evaluate_rule(rule: &Rule, req: &RequestTuple) -> Decision {
    if !rule.target.matches(req) {
        return Decision::NotApplicable;
    }
    if let Some(condition) = &rule.condition {
        if !condition.evaluate(req) {
            return Decision::NotApplicable;
        }
    }
    rule.effect.into()
}

pub fn evaluate_policy(policy: &Policy, req: &RequestTuple) -> Decision {
    if !policy.target.matches(req) {
        return Decision::NotApplicable;
    }
    combine(
        policy.rule_combining,
        policy.rules.iter().map(|r| evaluate_rule(r, req)),
    )
}

pub fn evaluate(ps: &PolicySet, req: &RequestTuple) -> Decision {
    if !ps.target.matches(req) {
        return Decision::NotApplicable;
    }
    combine(
        ps.policy_combining,
        ps.policies.iter().map(|p| evaluate_policy(p, req)),
    )
}

fn combine(
    algorithm: CombiningAlgorithm,
    mut decisions: impl Iterator<Item = Decision>,
) -> Decision {
    match algorithm {
        CombiningAlgorithm::FirstApplicable => decisions
            .find(|d| matches!(d, Decision::Permit | Decision::Deny))
            .unwrap_or(Decision::NotApplicable),
        CombiningAlgorithm::PermitOverrides => {
            let mut saw_deny = false;
            for d in decisions {
                match d {
                    Decision::Permit => return Decision::Permit,
                    Decision::Deny => saw_deny = true,
                    _ => {}
                }
            }
            if saw_deny {
                Decision::Deny
            } else {
                Decision::NotApplicable
            }
        }
        CombiningAlgorithm::DenyOverrides => {
            let mut saw_permit = false;
            for d in decisions {
                match d {
                    Decision::Deny => return Decision::Deny,
                    Decision::Permit => saw_permit = true,
                    _ => {}
                }
            }
            if saw_permit {
                Decision::Permit
            } else {
                Decision::NotApplicable
            }
        }
    }
}
