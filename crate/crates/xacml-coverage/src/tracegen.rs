//! Derivation of the complete trace set for each of the four rule-level
//! coverage criteria.
//!
//! A trace is a chain of per-dimension constraints, one constraint tuple per
//! enclosure level (PolicySet, Policy, Rule), plus an optional expected
//! effect. A request covers a trace when it satisfies every constraint of
//! every level; effect-bearing traces additionally require the evaluation
//! decision to realize the effect.
//!
//! The four criteria:
//! - rule target true: the whole target chain matches;
//! - rule target false: the enclosing chain matches but the rule's own
//!   target is missed in a specific sign pattern;
//! - rule condition true: the chain matches and the condition holds;
//! - rule condition false: the chain matches and the condition fails.
//!
//! Every emitted trace is satisfiable: a witness request is constructed at
//! generation time and unsatisfiable candidates are discarded.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    AttributeValue, Category, ConditionExpr, Effect, Level, Policy, PolicySet, RequestTuple, Rule,
    RuleTargetSet, TargetTuple,
};

/// Negated-condition expansion guard; conditions in the supported subset are
/// tiny, so hitting this means the input is out of scope.
const MAX_NEGATION_DISJUNCTS: usize = 4096;

/// The four rule-level coverage criteria.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    RuleTargetTrue,
    RuleTargetFalse,
    RuleConditionTrue,
    RuleConditionFalse,
}

impl Criterion {
    pub const ALL: [Criterion; 4] = [
        Criterion::RuleTargetTrue,
        Criterion::RuleTargetFalse,
        Criterion::RuleConditionTrue,
        Criterion::RuleConditionFalse,
    ];

    /// Short code used on the command line and in file names.
    pub fn code(self) -> &'static str {
        match self {
            Criterion::RuleTargetTrue => "rtt",
            Criterion::RuleTargetFalse => "rtf",
            Criterion::RuleConditionTrue => "rct",
            Criterion::RuleConditionFalse => "rcf",
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Criterion::RuleTargetTrue => "Rule Target True",
            Criterion::RuleTargetFalse => "Rule Target False",
            Criterion::RuleConditionTrue => "Rule Condition True",
            Criterion::RuleConditionFalse => "Rule Condition False",
        })
    }
}

/// One constraint literal over a request dimension.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ConstraintLiteral {
    /// At least one request value must be in the set.
    #[serde(rename = "require")]
    RequireOneOf(BTreeSet<AttributeValue>),
    /// No request value may be in the set.
    #[serde(rename = "forbid")]
    ForbidAllOf(BTreeSet<AttributeValue>),
}

impl ConstraintLiteral {
    pub fn require(values: impl IntoIterator<Item = AttributeValue>) -> Self {
        ConstraintLiteral::RequireOneOf(values.into_iter().collect())
    }

    pub fn forbid(values: impl IntoIterator<Item = AttributeValue>) -> Self {
        ConstraintLiteral::ForbidAllOf(values.into_iter().collect())
    }

    pub fn satisfied_by(&self, values: &BTreeSet<AttributeValue>) -> bool {
        match self {
            ConstraintLiteral::RequireOneOf(set) => values.iter().any(|v| set.contains(v)),
            ConstraintLiteral::ForbidAllOf(set) => !values.iter().any(|v| set.contains(v)),
        }
    }
}

/// Conjunction of literals over one dimension; an empty list means "any".
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DimensionConstraint {
    pub literals: Vec<ConstraintLiteral>,
}

impl DimensionConstraint {
    pub fn is_any(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn satisfied_by(&self, values: &BTreeSet<AttributeValue>) -> bool {
        self.literals.iter().all(|l| l.satisfied_by(values))
    }

    fn push_unique(&mut self, literal: ConstraintLiteral) {
        if !self.literals.contains(&literal) {
            self.literals.push(literal);
        }
    }
}

/// Constraints for one enclosure level: the four dimensions in canonical
/// (subject, resource, action, environment) order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConstraintTuple {
    pub dims: [DimensionConstraint; 4],
}

impl ConstraintTuple {
    pub fn dim(&self, category: Category) -> &DimensionConstraint {
        &self.dims[category.index()]
    }

    pub fn dim_mut(&mut self, category: Category) -> &mut DimensionConstraint {
        &mut self.dims[category.index()]
    }

    pub fn satisfied_by(&self, req: &RequestTuple) -> bool {
        Category::ALL
            .iter()
            .all(|&c| self.dim(c).satisfied_by(req.dimension(c)))
    }
}

/// A criterion-specific constraint chain plus expected effect. `effect` is
/// absent for all rule-target-false and rule-condition-false traces, and
/// for rule-target-true traces of conditioned rules.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub id: String,
    #[serde(skip, default = "placeholder_criterion")]
    pub criterion: Criterion,
    pub rule_id: String,
    pub chain: Vec<ConstraintTuple>,
    #[serde(default)]
    pub effect: Option<Effect>,
}

fn placeholder_criterion() -> Criterion {
    // Overwritten by TraceSet deserialization, which carries the criterion.
    Criterion::RuleTargetTrue
}

/// The trace set of one criterion for one policy document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceSet {
    pub criterion: Criterion,
    pub policy_id: String,
    pub traces: Vec<Trace>,
}

impl<'de> Deserialize<'de> for TraceSet {
    fn deserialize<D>(deserializer: D) -> Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        #[derive(Deserialize)]
        struct Raw {
            criterion: Criterion,
            policy_id: String,
            traces: Vec<Trace>,
        }
        let raw = Raw::deserialize(deserializer)?;
        let mut traces = raw.traces;
        for t in &mut traces {
            t.criterion = raw.criterion;
        }
        Ok(TraceSet {
            criterion: raw.criterion,
            policy_id: raw.policy_id,
            traces,
        })
    }
}

/// Parse trace-set JSON: either a single set object or an array of sets.
pub fn parse_trace_sets(json: &str) -> Result<Vec<TraceSet>, serde_json::Error> {
    let value: serde_json::Value = serde_json::from_str(json)?;
    if value.is_array() {
        serde_json::from_value(value)
    } else {
        serde_json::from_value::<TraceSet>(value).map(|s| vec![s])
    }
}

#[derive(Debug, Error)]
pub enum TraceGenError {
    #[error("unknown rule {policy_id}/{rule_id}")]
    UnknownRule { policy_id: String, rule_id: String },
    #[error("unsupported condition in rule {rule_id}: {detail}")]
    UnsupportedCondition { rule_id: String, detail: String },
}

/// The ordered chain of target tuples enclosing one rule.
pub fn rule_target_set(
    ps: &PolicySet,
    policy_id: &str,
    rule_id: &str,
) -> Result<RuleTargetSet, TraceGenError> {
    let unknown = || TraceGenError::UnknownRule {
        policy_id: policy_id.to_string(),
        rule_id: rule_id.to_string(),
    };
    let policy = ps
        .policies
        .iter()
        .find(|p| p.id == policy_id)
        .ok_or_else(unknown)?;
    let rule = policy
        .rules
        .iter()
        .find(|r| r.id == rule_id)
        .ok_or_else(unknown)?;
    Ok(RuleTargetSet {
        chain: vec![
            (Level::PolicySet, ps.target.clone()),
            (Level::Policy, policy.target.clone()),
            (Level::Rule, rule.target.clone()),
        ],
    })
}

fn tuple_constraints(tuple: &TargetTuple) -> ConstraintTuple {
    let mut out = ConstraintTuple::default();
    for &c in &Category::ALL {
        let set = tuple.dimension(c);
        if !set.is_empty() {
            out.dim_mut(c)
                .literals
                .push(ConstraintLiteral::RequireOneOf(set.clone()));
        }
    }
    out
}

fn target_chain(ps: &PolicySet, policy: &Policy, rule: &Rule) -> Vec<ConstraintTuple> {
    vec![
        tuple_constraints(&ps.target),
        tuple_constraints(&policy.target),
        tuple_constraints(&rule.target),
    ]
}

/// Construct a request satisfying every constraint of the chain, or `None`
/// when the chain is unsatisfiable. For each require literal the smallest
/// non-forbidden value is picked; forbid-only dimensions stay empty and are
/// satisfied vacuously.
fn witness_for_chain(chain: &[ConstraintTuple]) -> Option<RequestTuple> {
    let mut req = RequestTuple::empty();
    for &c in &Category::ALL {
        let mut forbidden: BTreeSet<&AttributeValue> = BTreeSet::new();
        for level in chain {
            for literal in &level.dim(c).literals {
                if let ConstraintLiteral::ForbidAllOf(set) = literal {
                    forbidden.extend(set.iter());
                }
            }
        }
        for level in chain {
            for literal in &level.dim(c).literals {
                if let ConstraintLiteral::RequireOneOf(set) = literal {
                    let pick = set.iter().find(|v| !forbidden.contains(v))?;
                    req.insert(pick.clone());
                }
            }
        }
    }
    Some(req)
}

/// A witness request for a trace, when one exists. Traces produced by the
/// generators in this module always have one.
pub fn witness_request(trace: &Trace) -> Option<RequestTuple> {
    witness_for_chain(&trace.chain)
}

/// Rule target true: one trace per rule, the full target chain as positive
/// constraints. The effect is the rule's effect only when the rule has no
/// condition; a conditioned rule's outcome is unknown from the target alone.
pub fn gen_rtt(ps: &PolicySet) -> TraceSet {
    let mut traces = Vec::new();
    for (index, (policy, rule)) in ps.iter_rules().enumerate() {
        let chain = target_chain(ps, policy, rule);
        debug_assert!(witness_for_chain(&chain).is_some());
        traces.push(Trace {
            id: format!("T{}", index + 1),
            criterion: Criterion::RuleTargetTrue,
            rule_id: rule.id.clone(),
            chain,
            effect: rule.condition.is_none().then_some(rule.effect),
        });
    }
    TraceSet {
        criterion: Criterion::RuleTargetTrue,
        policy_id: ps.id.clone(),
        traces,
    }
}

/// Rule target false: the enclosing levels stay positive while every
/// satisfiable non-empty subset of the rule's negatable dimensions is
/// flipped to a forbid constraint, one trace per sign pattern.
///
/// A dimension is negatable only if the tightest enclosing require set for
/// it either is "any" or still has a value outside the rule's set; otherwise
/// the enclosing constraint forces the rule's value and the negation could
/// never be satisfied.
pub fn gen_rtf(ps: &PolicySet) -> TraceSet {
    let mut traces = Vec::new();
    for (index, (policy, rule)) in ps.iter_rules().enumerate() {
        let eligible: Vec<Category> = Category::ALL
            .into_iter()
            .filter(|&c| {
                let rule_set = rule.target.dimension(c);
                if rule_set.is_empty() {
                    return false;
                }
                let enclosing = [policy.target.dimension(c), ps.target.dimension(c)]
                    .into_iter()
                    .find(|s| !s.is_empty());
                match enclosing {
                    None => true,
                    Some(e) => e.difference(rule_set).next().is_some(),
                }
            })
            .collect();
        if eligible.is_empty() {
            continue;
        }

        let n = eligible.len();
        let mut rule_traces = Vec::new();
        for mask in (1..(1u32 << n)).rev() {
            let mut rule_level = ConstraintTuple::default();
            for &c in &Category::ALL {
                let set = rule.target.dimension(c);
                if set.is_empty() {
                    continue;
                }
                let negated = eligible
                    .iter()
                    .position(|&e| e == c)
                    .is_some_and(|j| mask & (1 << (n - 1 - j)) != 0);
                rule_level.dim_mut(c).literals.push(if negated {
                    ConstraintLiteral::ForbidAllOf(set.clone())
                } else {
                    ConstraintLiteral::RequireOneOf(set.clone())
                });
            }
            let chain = vec![
                tuple_constraints(&ps.target),
                tuple_constraints(&policy.target),
                rule_level,
            ];
            if witness_for_chain(&chain).is_some() {
                rule_traces.push(chain);
            }
        }

        let single = rule_traces.len() == 1;
        for (k, chain) in rule_traces.into_iter().enumerate() {
            let id = if single {
                format!("T{}", index + 1)
            } else {
                format!("T{}_{}", index + 1, k + 1)
            };
            traces.push(Trace {
                id,
                criterion: Criterion::RuleTargetFalse,
                rule_id: rule.id.clone(),
                chain,
                effect: None,
            });
        }
    }
    TraceSet {
        criterion: Criterion::RuleTargetFalse,
        policy_id: ps.id.clone(),
        traces,
    }
}

/// Rule condition true: the target chain conjoined with condition-satisfying
/// literals; the effect is always the rule's effect. Rules without a
/// condition yield their target chain with the effect attached.
pub fn gen_rct(ps: &PolicySet) -> Result<TraceSet, TraceGenError> {
    let mut traces = Vec::new();
    for (index, (policy, rule)) in ps.iter_rules().enumerate() {
        let mut chain = target_chain(ps, policy, rule);
        if let Some(condition) = &rule.condition {
            let rule_level = chain.last_mut().expect("chain has a rule level");
            for (category, literal) in truth_literals(condition, &rule.id)? {
                rule_level.dim_mut(category).push_unique(literal);
            }
        }
        if witness_for_chain(&chain).is_none() {
            // Condition can never hold under this target; nothing to cover.
            continue;
        }
        traces.push(Trace {
            id: format!("T{}", index + 1),
            criterion: Criterion::RuleConditionTrue,
            rule_id: rule.id.clone(),
            chain,
            effect: Some(rule.effect),
        });
    }
    Ok(TraceSet {
        criterion: Criterion::RuleConditionTrue,
        policy_id: ps.id.clone(),
        traces,
    })
}

/// Rule condition false: only conditioned rules produce traces. The target
/// chain (target true) is conjoined with condition-falsifying literals, one
/// trace per satisfiable disjunct of the negated condition's disjunctive
/// normal form.
pub fn gen_rcf(ps: &PolicySet) -> Result<TraceSet, TraceGenError> {
    let mut traces = Vec::new();
    for (index, (policy, rule)) in ps.iter_rules().enumerate() {
        let Some(condition) = &rule.condition else {
            continue;
        };
        let negated = to_nnf(condition, true);
        let mut disjuncts = dnf(&negated, &rule.id)?;
        disjuncts.dedup();
        let mut rule_traces = Vec::new();
        for literals in disjuncts {
            let mut chain = target_chain(ps, policy, rule);
            let rule_level = chain.last_mut().expect("chain has a rule level");
            for literal in literals {
                let (category, constraint) = match literal {
                    NnfLiteral::Positive(v) => (v.category, ConstraintLiteral::require([v])),
                    NnfLiteral::Negative(v) => (v.category, ConstraintLiteral::forbid([v])),
                };
                rule_level.dim_mut(category).push_unique(constraint);
            }
            if witness_for_chain(&chain).is_some() && !rule_traces.contains(&chain) {
                rule_traces.push(chain);
            }
        }
        let single = rule_traces.len() == 1;
        for (k, chain) in rule_traces.into_iter().enumerate() {
            let id = if single {
                format!("T{}", index + 1)
            } else {
                format!("T{}_{}", index + 1, k + 1)
            };
            traces.push(Trace {
                id,
                criterion: Criterion::RuleConditionFalse,
                rule_id: rule.id.clone(),
                chain,
                effect: None,
            });
        }
    }
    Ok(TraceSet {
        criterion: Criterion::RuleConditionFalse,
        policy_id: ps.id.clone(),
        traces,
    })
}

/// Trace sets for all four criteria, in canonical criterion order.
pub fn gen_all(ps: &PolicySet) -> Result<Vec<TraceSet>, TraceGenError> {
    Ok(vec![gen_rtt(ps), gen_rtf(ps), gen_rct(ps)?, gen_rcf(ps)?])
}

/// Trace set for one criterion.
pub fn gen_criterion(ps: &PolicySet, criterion: Criterion) -> Result<TraceSet, TraceGenError> {
    match criterion {
        Criterion::RuleTargetTrue => Ok(gen_rtt(ps)),
        Criterion::RuleTargetFalse => Ok(gen_rtf(ps)),
        Criterion::RuleConditionTrue => gen_rct(ps),
        Criterion::RuleConditionFalse => gen_rcf(ps),
    }
}

// --- condition normal forms -------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum NnfLiteral {
    Positive(AttributeValue),
    Negative(AttributeValue),
}

/// Negation normal form: push negations down to the predicates.
fn to_nnf(expr: &ConditionExpr, negated: bool) -> ConditionExpr {
    match expr {
        ConditionExpr::And(items) => {
            let mapped = items.iter().map(|e| to_nnf(e, negated)).collect();
            if negated {
                ConditionExpr::Or(mapped)
            } else {
                ConditionExpr::And(mapped)
            }
        }
        ConditionExpr::Or(items) => {
            let mapped = items.iter().map(|e| to_nnf(e, negated)).collect();
            if negated {
                ConditionExpr::And(mapped)
            } else {
                ConditionExpr::Or(mapped)
            }
        }
        ConditionExpr::Not(inner) => to_nnf(inner, !negated),
        ConditionExpr::Predicate(v) => {
            if negated {
                ConditionExpr::Not(Box::new(ConditionExpr::Predicate(v.clone())))
            } else {
                ConditionExpr::Predicate(v.clone())
            }
        }
    }
}

fn collect_conjuncts<'a>(expr: &'a ConditionExpr, out: &mut Vec<&'a ConditionExpr>) {
    match expr {
        ConditionExpr::And(items) => {
            for item in items {
                collect_conjuncts(item, out);
            }
        }
        other => out.push(other),
    }
}

fn collect_disjuncts<'a>(expr: &'a ConditionExpr, out: &mut Vec<&'a ConditionExpr>) {
    match expr {
        ConditionExpr::Or(items) => {
            for item in items {
                collect_disjuncts(item, out);
            }
        }
        other => out.push(other),
    }
}

/// Literals whose conjunction forces the condition true: the condition (in
/// negation normal form) must be a conjunction of positive predicates,
/// negated predicates, and single-category disjunctions of positive
/// predicates. Each disjunction becomes one require-one-of literal;
/// anything else cannot be expressed as a single constraint conjunction.
fn truth_literals(
    condition: &ConditionExpr,
    rule_id: &str,
) -> Result<Vec<(Category, ConstraintLiteral)>, TraceGenError> {
    let unsupported = |detail: &str| TraceGenError::UnsupportedCondition {
        rule_id: rule_id.to_string(),
        detail: detail.to_string(),
    };
    let nnf = to_nnf(condition, false);
    let mut conjuncts = Vec::new();
    collect_conjuncts(&nnf, &mut conjuncts);

    let mut out: Vec<(Category, ConstraintLiteral)> = Vec::new();
    for clause in conjuncts {
        match clause {
            ConditionExpr::Predicate(v) => {
                out.push((v.category, ConstraintLiteral::require([v.clone()])));
            }
            ConditionExpr::Not(inner) => match inner.as_ref() {
                ConditionExpr::Predicate(v) => {
                    out.push((v.category, ConstraintLiteral::forbid([v.clone()])));
                }
                _ => unreachable!("negation normal form"),
            },
            ConditionExpr::Or(_) => {
                let mut disjuncts = Vec::new();
                collect_disjuncts(clause, &mut disjuncts);
                let mut values = BTreeSet::new();
                let mut category = None;
                for d in disjuncts {
                    let ConditionExpr::Predicate(v) = d else {
                        return Err(unsupported("disjunction contains a non-predicate operand"));
                    };
                    if *category.get_or_insert(v.category) != v.category {
                        return Err(unsupported("disjunction spans multiple categories"));
                    }
                    values.insert(v.clone());
                }
                let category = category.expect("non-empty disjunction");
                out.push((category, ConstraintLiteral::RequireOneOf(values)));
            }
            ConditionExpr::And(_) => unreachable!("conjuncts are flattened"),
        }
    }
    Ok(out)
}

/// Disjunctive normal form of a condition already in negation normal form.
fn dnf(expr: &ConditionExpr, rule_id: &str) -> Result<Vec<Vec<NnfLiteral>>, TraceGenError> {
    let too_complex = || TraceGenError::UnsupportedCondition {
        rule_id: rule_id.to_string(),
        detail: format!("negated condition expands beyond {MAX_NEGATION_DISJUNCTS} disjuncts"),
    };
    let disjuncts = match expr {
        ConditionExpr::Predicate(v) => vec![vec![NnfLiteral::Positive(v.clone())]],
        ConditionExpr::Not(inner) => match inner.as_ref() {
            ConditionExpr::Predicate(v) => vec![vec![NnfLiteral::Negative(v.clone())]],
            _ => unreachable!("negation normal form"),
        },
        ConditionExpr::Or(items) => {
            let mut out = Vec::new();
            for item in items {
                out.extend(dnf(item, rule_id)?);
                if out.len() > MAX_NEGATION_DISJUNCTS {
                    return Err(too_complex());
                }
            }
            out
        }
        ConditionExpr::And(items) => {
            let mut out: Vec<Vec<NnfLiteral>> = vec![Vec::new()];
            for item in items {
                let item_disjuncts = dnf(item, rule_id)?;
                let mut next = Vec::with_capacity(out.len() * item_disjuncts.len());
                for base in &out {
                    for extension in &item_disjuncts {
                        let mut combined = base.clone();
                        for lit in extension {
                            if !combined.contains(lit) {
                                combined.push(lit.clone());
                            }
                        }
                        next.push(combined);
                    }
                }
                if next.len() > MAX_NEGATION_DISJUNCTS {
                    return Err(too_complex());
                }
                out = next;
            }
            out
        }
    };
    Ok(disjuncts)
}
