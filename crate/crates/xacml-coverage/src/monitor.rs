//! On-line coverage engine: consumes trace sets plus a stream of
//! request/response events and maintains per-criterion coverage state.
//!
//! Coverage always requires the response event, even for effect-less traces,
//! so only executed tests count. Matching is recomputed per response against
//! all traces; trace sets are small and this keeps the engine auditable.
//!
//! Events travel as line-delimited JSON:
//!
//! ```text
//! {"type":"request","id":"r1","tuple":{"subjects":[...],...}}
//! {"type":"response","id":"r1","decision":"Deny"}
//! {"type":"flush"}
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Decision, RequestTuple};
use crate::tracegen::{Criterion, Trace, TraceSet};

/// One monitoring event. A request event parks the tuple until the paired
/// response arrives; a flush asks for an interim report without resetting
/// anything.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Event {
    Request { id: String, tuple: RequestTuple },
    Response { id: String, decision: Decision },
    Flush,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MonitorError {
    #[error("response event for unknown request id {0}")]
    OrphanResponse(String),
    #[error("duplicate request id {0}")]
    DuplicateRequestId(String),
}

/// A request covers a trace when, at every enclosure level and in every
/// dimension, each require literal finds a request value in its set and each
/// forbid literal finds none.
pub fn trace_matches(trace: &Trace, req: &RequestTuple) -> bool {
    trace.chain.iter().all(|level| level.satisfied_by(req))
}

#[derive(Debug, Clone, Default)]
struct TraceCoverage {
    covered: bool,
    covering_request_ids: Vec<String>,
}

/// Single-writer coverage state; events are applied serially in arrival
/// order. Covered flags are monotone: once covered, a trace stays covered.
#[derive(Debug, Clone)]
pub struct CoverageState {
    sets: Vec<TraceSet>,
    coverage: Vec<Vec<TraceCoverage>>,
    pending: BTreeMap<String, RequestTuple>,
    seen_ids: BTreeSet<String>,
    skipped_events: u64,
}

impl CoverageState {
    pub fn new(sets: Vec<TraceSet>) -> Self {
        let coverage = sets
            .iter()
            .map(|s| vec![TraceCoverage::default(); s.traces.len()])
            .collect();
        CoverageState {
            sets,
            coverage,
            pending: BTreeMap::new(),
            seen_ids: BTreeSet::new(),
            skipped_events: 0,
        }
    }

    pub fn trace_sets(&self) -> &[TraceSet] {
        &self.sets
    }

    /// Request ids that covered a trace, in arrival order.
    pub fn covering_requests(&self, criterion: Criterion, trace_id: &str) -> Option<&[String]> {
        self.sets.iter().enumerate().find_map(|(i, set)| {
            if set.criterion != criterion {
                return None;
            }
            set.traces
                .iter()
                .position(|t| t.id == trace_id)
                .map(|j| self.coverage[i][j].covering_request_ids.as_slice())
        })
    }

    /// Record an event the caller chose to skip (e.g. a malformed input
    /// line); the count surfaces in the report.
    pub fn note_skipped(&mut self) {
        self.skipped_events += 1;
    }

    /// Apply one event. A response pairs with the pending request of the
    /// same id and marks every trace it covers; a flush returns an interim
    /// report.
    pub fn ingest(&mut self, event: Event) -> Result<Option<CoverageReport>, MonitorError> {
        match event {
            Event::Request { id, tuple } => {
                if !self.seen_ids.insert(id.clone()) {
                    return Err(MonitorError::DuplicateRequestId(id));
                }
                self.pending.insert(id, tuple);
                Ok(None)
            }
            Event::Response { id, decision } => {
                let tuple = self
                    .pending
                    .remove(&id)
                    .ok_or_else(|| MonitorError::OrphanResponse(id.clone()))?;
                for (set, coverage) in self.sets.iter().zip(&mut self.coverage) {
                    for (trace, entry) in set.traces.iter().zip(coverage) {
                        let effect_ok = match trace.effect {
                            None => true,
                            Some(effect) => decision.matches_effect(effect),
                        };
                        if effect_ok && trace_matches(trace, &tuple) {
                            entry.covered = true;
                            entry.covering_request_ids.push(id.clone());
                        }
                    }
                }
                Ok(None)
            }
            Event::Flush => Ok(Some(self.report())),
        }
    }

    /// The current coverage report. Also emitted on flush events; never
    /// resets state.
    pub fn report(&self) -> CoverageReport {
        let mut criteria: BTreeMap<Criterion, CriterionCoverage> = BTreeMap::new();
        for (set, coverage) in self.sets.iter().zip(&self.coverage) {
            let entry = criteria.entry(set.criterion).or_default();
            for (trace, state) in set.traces.iter().zip(coverage) {
                entry.total += 1;
                if state.covered {
                    entry.covered += 1;
                } else {
                    entry.uncovered.push(trace.id.clone());
                }
            }
        }
        for entry in criteria.values_mut() {
            entry.percentage = percentage(entry.covered, entry.total);
        }
        CoverageReport {
            criteria,
            skipped_events: self.skipped_events,
        }
    }
}

/// Percentage rounded half-up to two decimals; a vacuous 0/0 reports 100.
fn percentage(covered: usize, total: usize) -> f64 {
    if total == 0 {
        return 100.0;
    }
    (covered as f64 / total as f64 * 10_000.0).round() / 100.0
}

/// Per-criterion coverage figures.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CriterionCoverage {
    pub total: usize,
    pub covered: usize,
    pub percentage: f64,
    pub uncovered: Vec<String>,
}

/// Final or interim coverage report. Criteria with zero traces still appear,
/// flagged by their `total` of 0.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    #[serde(flatten)]
    pub criteria: BTreeMap<Criterion, CriterionCoverage>,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub skipped_events: u64,
}

fn is_zero(n: &u64) -> bool {
    *n == 0
}

impl CoverageReport {
    /// Aligned text table, one row per criterion.
    pub fn render_table(&self, column_title: &str) -> String {
        let rows: Vec<(String, String)> = self
            .criteria
            .iter()
            .map(|(criterion, cov)| {
                let cell = if cov.total == 0 {
                    format!("{:.2}% (no traces)", cov.percentage)
                } else {
                    format!("{:.2}%", cov.percentage)
                };
                (criterion.to_string(), cell)
            })
            .collect();
        let header = "Coverage Criterion";
        let left = rows
            .iter()
            .map(|(name, _)| name.len())
            .chain([header.len()])
            .max()
            .unwrap_or(0);
        let mut out = String::new();
        let _ = writeln!(out, "{header:<left$}  {column_title}");
        for (name, cell) in rows {
            let _ = writeln!(out, "{name:<left$}  {cell}");
        }
        if self.skipped_events > 0 {
            let _ = writeln!(out, "(skipped events: {})", self.skipped_events);
        }
        out
    }
}
