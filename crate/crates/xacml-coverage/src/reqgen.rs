//! Combinatorial test-request generation from a policy's own attribute
//! values.
//!
//! Both strategies draw from the four harvested value sets. The simple
//! strategy combines one value per dimension; the multiple strategy combines
//! whole subsets per dimension, which is what lets a single request carry
//! several subjects (or resources) at once. Suites are deterministic: two
//! runs over the same policy produce identical request sequences.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{AttributeValue, Category, PolicySet, RequestTuple};
use crate::xacml_io;

/// Default ceiling on multiple-combinatorial suite size.
pub const DEFAULT_SUITE_CAP: u64 = 1 << 20;

#[derive(Debug, Error)]
pub enum ReqGenError {
    #[error("policy targets and conditions reference no attribute values")]
    EmptyPolicyValues,
    #[error("suite of {required} requests exceeds the cap of {cap}")]
    SuiteTooLarge { required: u128, cap: u64 },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Request-generation strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Simple,
    Multiple,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Simple => "simple",
            Strategy::Multiple => "multiple",
        })
    }
}

/// The four per-dimension value sets harvested from a policy.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValueSets {
    pub subjects: BTreeSet<AttributeValue>,
    pub resources: BTreeSet<AttributeValue>,
    pub actions: BTreeSet<AttributeValue>,
    pub environments: BTreeSet<AttributeValue>,
}

impl ValueSets {
    pub fn dimension(&self, category: Category) -> &BTreeSet<AttributeValue> {
        match category {
            Category::Subject => &self.subjects,
            Category::Resource => &self.resources,
            Category::Action => &self.actions,
            Category::Environment => &self.environments,
        }
    }

    fn insert(&mut self, value: AttributeValue) {
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

/// Union of the attribute values appearing in any target at any level, plus
/// the values referenced by condition predicates. Condition values must be
/// harvestable: they are the only way a generated suite can ever satisfy a
/// conditioned rule.
pub fn harvest(ps: &PolicySet) -> ValueSets {
    let mut sets = ValueSets::default();
    let mut add_target = |target: &crate::model::TargetTuple| {
        for &c in &Category::ALL {
            for v in target.dimension(c) {
                sets.insert(v.clone());
            }
        }
    };
    add_target(&ps.target);
    for policy in &ps.policies {
        add_target(&policy.target);
        for rule in &policy.rules {
            add_target(&rule.target);
        }
    }
    for (_, rule) in ps.iter_rules() {
        if let Some(condition) = &rule.condition {
            for v in condition.predicate_values() {
                sets.insert(v.clone());
            }
        }
    }
    sets
}

/// Simple combinatorial: the full cartesian product over the non-empty
/// harvested sets, one value per dimension per request. Empty sets
/// contribute no element, i.e. the dimension is absent from every request.
pub fn gen_simple(ps: &PolicySet) -> Result<Vec<RequestTuple>, ReqGenError> {
    let sets = harvest(ps);
    if sets.is_empty() {
        return Err(ReqGenError::EmptyPolicyValues);
    }
    // One choice list per dimension: each value alone, or nothing at all
    // for an empty dimension.
    let choices: Vec<Vec<Option<&AttributeValue>>> = Category::ALL
        .iter()
        .map(|&c| {
            let set = sets.dimension(c);
            if set.is_empty() {
                vec![None]
            } else {
                set.iter().map(Some).collect()
            }
        })
        .collect();
    Ok(cartesian(&choices)
        .map(|combo| RequestTuple::from_values(combo.into_iter().flatten().cloned()))
        .collect())
}

/// Multiple combinatorial with the default suite cap.
pub fn gen_multiple(ps: &PolicySet) -> Result<Vec<RequestTuple>, ReqGenError> {
    gen_multiple_with_cap(ps, DEFAULT_SUITE_CAP)
}

/// Multiple combinatorial: the cartesian product over the power sets of the
/// four harvested sets. Subsets are enumerated in binary-counting order over
/// each sorted set; the empty subset yields an absent dimension. The suite
/// has `2^(|S|+|Res|+|A|+|E|)` requests, so a cap guards against policies
/// with too many distinct values.
pub fn gen_multiple_with_cap(ps: &PolicySet, cap: u64) -> Result<Vec<RequestTuple>, ReqGenError> {
    let sets = harvest(ps);
    let total_values: u32 = Category::ALL
        .iter()
        .map(|&c| sets.dimension(c).len() as u32)
        .sum();
    let required: u128 = 1u128 << total_values.min(127);
    if required > cap as u128 {
        return Err(ReqGenError::SuiteTooLarge { required, cap });
    }

    let subset_lists: Vec<Vec<Vec<&AttributeValue>>> = Category::ALL
        .iter()
        .map(|&c| subsets(sets.dimension(c)))
        .collect();
    let mut suite = Vec::with_capacity(required as usize);
    for s in &subset_lists[0] {
        for r in &subset_lists[1] {
            for a in &subset_lists[2] {
                for e in &subset_lists[3] {
                    let values = s.iter().chain(r).chain(a).chain(e).map(|v| (*v).clone());
                    suite.push(RequestTuple::from_values(values));
                }
            }
        }
    }
    Ok(suite)
}

/// Generate a suite with the named strategy.
pub fn generate(ps: &PolicySet, strategy: Strategy) -> Result<Vec<RequestTuple>, ReqGenError> {
    match strategy {
        Strategy::Simple => gen_simple(ps),
        Strategy::Multiple => gen_multiple(ps),
    }
}

/// All subsets of a sorted set in binary-counting order: bit `j` of the
/// counter selects the `j`-th smallest element.
fn subsets(set: &BTreeSet<AttributeValue>) -> Vec<Vec<&AttributeValue>> {
    let items: Vec<&AttributeValue> = set.iter().collect();
    let n = items.len();
    (0..(1usize << n))
        .map(|mask| {
            (0..n)
                .filter(|j| mask & (1 << j) != 0)
                .map(|j| items[j])
                .collect()
        })
        .collect()
}

/// Cartesian product in row-major order (first dimension outermost).
fn cartesian<'a>(
    choices: &'a [Vec<Option<&'a AttributeValue>>],
) -> impl Iterator<Item = Vec<Option<&'a AttributeValue>>> + 'a {
    let total: usize = choices.iter().map(Vec::len).product();
    (0..total).map(move |mut index| {
        let mut combo = vec![None; choices.len()];
        for (slot, options) in choices.iter().enumerate().rev() {
            combo[slot] = options[index % options.len()];
            index /= options.len();
        }
        combo
    })
}

/// Deterministic id for the `index`-th request of a suite (1-based file
/// numbering).
pub fn request_id(strategy: Strategy, index: usize) -> String {
    format!("req_{}_{:04}", strategy, index + 1)
}

/// Manifest written next to a generated suite, listing request ids in suite
/// order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteManifest {
    pub strategy: Strategy,
    pub ids: Vec<String>,
}

/// Materialize a suite as one XACML request file per tuple plus a
/// `manifest.json` listing the ids in order.
pub fn write_suite(
    dir: impl AsRef<Path>,
    strategy: Strategy,
    suite: &[RequestTuple],
) -> Result<SuiteManifest, ReqGenError> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let mut ids = Vec::with_capacity(suite.len());
    for (index, req) in suite.iter().enumerate() {
        let id = request_id(strategy, index);
        std::fs::write(dir.join(format!("{id}.xml")), xacml_io::emit_request(req))?;
        ids.push(id);
    }
    let manifest = SuiteManifest { strategy, ids };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(dir.join("manifest.json"), json)?;
    Ok(manifest)
}
