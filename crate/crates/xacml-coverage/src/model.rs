//! Core domain types for policies, requests, and decisions, plus the two
//! matching predicates (target matching and condition evaluation) every other
//! module builds on.
//!
//! All types are immutable after construction and all operations are pure, so
//! everything here is safe to share across threads.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

/// XML-schema string type URI, the data type of every literal in the
/// supported policy subset.
pub const XS_STRING: &str = "http://www.w3.org/2001/XMLSchema#string";

/// The four attribute dimensions of targets and requests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Subject,
    Resource,
    Action,
    Environment,
}

impl Category {
    /// All categories in canonical (subject, resource, action, environment) order.
    pub const ALL: [Category; 4] = [
        Category::Subject,
        Category::Resource,
        Category::Action,
        Category::Environment,
    ];

    /// Position in the canonical order; used to index per-dimension arrays.
    pub fn index(self) -> usize {
        match self {
            Category::Subject => 0,
            Category::Resource => 1,
            Category::Action => 2,
            Category::Environment => 3,
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Category::Subject => "subject",
            Category::Resource => "resource",
            Category::Action => "action",
            Category::Environment => "environment",
        };
        f.write_str(name)
    }
}

/// One typed attribute occurrence: the atom of targets, requests, and traces.
///
/// Matching identity is `(category, attribute_id, value)`. The `data_type`
/// is preserved from the source document but never participates in equality,
/// ordering, or hashing.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttributeValue {
    pub category: Category,
    pub attribute_id: String,
    #[serde(default = "default_data_type")]
    pub data_type: String,
    pub value: String,
}

fn default_data_type() -> String {
    XS_STRING.to_owned()
}

impl AttributeValue {
    /// A string-typed attribute value. `attribute_id` and `value` must be
    /// non-empty.
    pub fn new(
        category: Category,
        attribute_id: impl Into<String>,
        value: impl Into<String>,
    ) -> Self {
        let attribute_id = attribute_id.into();
        let value = value.into();
        debug_assert!(!attribute_id.is_empty() && !value.is_empty());
        AttributeValue {
            category,
            attribute_id,
            data_type: XS_STRING.to_owned(),
            value,
        }
    }

    pub fn with_data_type(mut self, data_type: impl Into<String>) -> Self {
        self.data_type = data_type.into();
        self
    }

    fn key(&self) -> (Category, &str, &str) {
        (self.category, &self.attribute_id, &self.value)
    }
}

impl PartialEq for AttributeValue {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for AttributeValue {}

impl PartialOrd for AttributeValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for AttributeValue {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl Hash for AttributeValue {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key().hash(state);
    }
}

impl fmt::Display for AttributeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}={}", self.category, self.attribute_id, self.value)
    }
}

/// The 4-tuple of per-dimension value sets gating a PolicySet, Policy, or
/// Rule. An empty dimension set means "any": it matches every request.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TargetTuple {
    pub subjects: BTreeSet<AttributeValue>,
    pub resources: BTreeSet<AttributeValue>,
    pub actions: BTreeSet<AttributeValue>,
    pub environments: BTreeSet<AttributeValue>,
}

impl TargetTuple {
    /// The all-empty tuple, matching every request.
    pub fn any() -> Self {
        TargetTuple::default()
    }

    pub fn dimension(&self, category: Category) -> &BTreeSet<AttributeValue> {
        match category {
            Category::Subject => &self.subjects,
            Category::Resource => &self.resources,
            Category::Action => &self.actions,
            Category::Environment => &self.environments,
        }
    }

    pub fn dimension_mut(&mut self, category: Category) -> &mut BTreeSet<AttributeValue> {
        match category {
            Category::Subject => &mut self.subjects,
            Category::Resource => &mut self.resources,
            Category::Action => &mut self.actions,
            Category::Environment => &mut self.environments,
        }
    }

    /// Insert a value into the dimension named by its category.
    pub fn insert(&mut self, value: AttributeValue) {
        self.dimension_mut(value.category).insert(value);
    }

    pub fn is_any(&self) -> bool {
        Category::ALL.iter().all(|&c| self.dimension(c).is_empty())
    }

    /// Target matching: every dimension set is either empty or has at least
    /// one value present in the request.
    pub fn matches(&self, req: &RequestTuple) -> bool {
        Category::ALL.iter().all(|&c| {
            let wanted = self.dimension(c);
            wanted.is_empty() || req.dimension(c).iter().any(|v| wanted.contains(v))
        })
    }
}

/// Enclosure level of an entry in a [`RuleTargetSet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Level {
    PolicySet,
    Policy,
    Rule,
}

/// The ordered chain of target tuples from the enclosing PolicySet down to a
/// Rule. A request reaches a rule only by matching every tuple in the chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleTargetSet {
    pub chain: Vec<(Level, TargetTuple)>,
}

/// Boolean condition over request attributes. `Predicate(v)` is true iff the
/// request's dimension for `v.category` contains a value equal to `v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConditionExpr {
    And(Vec<ConditionExpr>),
    Or(Vec<ConditionExpr>),
    Not(Box<ConditionExpr>),
    Predicate(AttributeValue),
}

impl ConditionExpr {
    /// Two-valued evaluation: an attribute absent from the request makes its
    /// predicate false.
    pub fn evaluate(&self, req: &RequestTuple) -> bool {
        match self {
            ConditionExpr::And(items) => items.iter().all(|c| c.evaluate(req)),
            ConditionExpr::Or(items) => items.iter().any(|c| c.evaluate(req)),
            ConditionExpr::Not(inner) => !inner.evaluate(req),
            ConditionExpr::Predicate(v) => req.dimension(v.category).contains(v),
        }
    }

    /// Every attribute value referenced by a predicate, in syntax order.
    pub fn predicate_values(&self) -> Vec<&AttributeValue> {
        let mut out = Vec::new();
        self.collect_predicates(&mut out);
        out
    }

    fn collect_predicates<'a>(&'a self, out: &mut Vec<&'a AttributeValue>) {
        match self {
            ConditionExpr::And(items) | ConditionExpr::Or(items) => {
                for item in items {
                    item.collect_predicates(out);
                }
            }
            ConditionExpr::Not(inner) => inner.collect_predicates(out),
            ConditionExpr::Predicate(v) => out.push(v),
        }
    }
}

/// A rule's declared outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Effect {
    Permit,
    Deny,
}

impl fmt::Display for Effect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Effect::Permit => "Permit",
            Effect::Deny => "Deny",
        })
    }
}

/// The evaluation result returned to a requester.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    Permit,
    Deny,
    NotApplicable,
    Indeterminate,
}

impl Decision {
    /// Whether this decision realizes the given effect.
    pub fn matches_effect(self, effect: Effect) -> bool {
        Decision::from(effect) == self
    }
}

impl From<Effect> for Decision {
    fn from(effect: Effect) -> Self {
        match effect {
            Effect::Permit => Decision::Permit,
            Effect::Deny => Decision::Deny,
        }
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decision::Permit => "Permit",
            Decision::Deny => "Deny",
            Decision::NotApplicable => "NotApplicable",
            Decision::Indeterminate => "Indeterminate",
        })
    }
}

/// Reduction of multiple child decisions into one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombiningAlgorithm {
    FirstApplicable,
    PermitOverrides,
    DenyOverrides,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub id: String,
    pub target: TargetTuple,
    pub condition: Option<ConditionExpr>,
    pub effect: Effect,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Policy {
    pub id: String,
    pub target: TargetTuple,
    pub rules: Vec<Rule>,
    pub rule_combining: CombiningAlgorithm,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicySet {
    pub id: String,
    pub target: TargetTuple,
    pub policies: Vec<Policy>,
    pub policy_combining: CombiningAlgorithm,
}

impl PolicySet {
    /// All rules in document order, paired with their enclosing policy.
    pub fn iter_rules(&self) -> impl Iterator<Item = (&Policy, &Rule)> {
        self.policies
            .iter()
            .flat_map(|p| p.rules.iter().map(move |r| (p, r)))
    }
}

/// The request's four attribute sets; the unit the PDP evaluates and the
/// monitor matches against traces.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequestTuple {
    pub subjects: BTreeSet<AttributeValue>,
    pub resources: BTreeSet<AttributeValue>,
    pub actions: BTreeSet<AttributeValue>,
    pub environments: BTreeSet<AttributeValue>,
}

impl RequestTuple {
    /// The request with no attributes at all.
    pub fn empty() -> Self {
        RequestTuple::default()
    }

    pub fn from_values(values: impl IntoIterator<Item = AttributeValue>) -> Self {
        let mut req = RequestTuple::empty();
        for v in values {
            req.insert(v);
        }
        req
    }

    pub fn dimension(&self, category: Category) -> &BTreeSet<AttributeValue> {
        match category {
            Category::Subject => &self.subjects,
            Category::Resource => &self.resources,
            Category::Action => &self.actions,
            Category::Environment => &self.environments,
        }
    }

    /// Insert a value into the dimension named by its category.
    pub fn insert(&mut self, value: AttributeValue) {
        let dim = match value.category {
            Category::Subject => &mut self.subjects,
            Category::Resource => &mut self.resources,
            Category::Action => &mut self.actions,
            Category::Environment => &mut self.environments,
        };
        dim.insert(value);
    }

    pub fn is_empty(&self) -> bool {
        Category::ALL.iter().all(|&c| self.dimension(c).is_empty())
    }
}
