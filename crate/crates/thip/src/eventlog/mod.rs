//! Event logs over activity sequences.
//!
//! A [`Trace`] is one observed run: an ordered sequence of activity labels
//! tagged with a case id, optionally carrying the raw text it was extracted
//! from. An [`EventLog`] is a multiset of traces with unique case ids, and is
//! the input to process discovery and conformance checking. The
//! [`DirectlyFollowsGraph`] summarises which activity immediately follows
//! which across a log, plus the sets of start and end activities.

pub mod io;

pub use io::{read_log, read_log_file, write_log, write_log_file, LogFormat};

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised while building or parsing event logs.
#[derive(Debug, Error)]
pub enum LogError {
    /// An activity label was empty or contained only whitespace.
    #[error("EmptyLabel: trace {case_id:?} has an empty or whitespace-only activity label at position {position}")]
    EmptyLabel { case_id: String, position: usize },

    /// Two traces in one log share a case id.
    #[error("DuplicateCaseId: case id {0:?} appears more than once")]
    DuplicateCaseId(String),

    /// A serialized record could not be decoded.
    #[error("MalformedRecord: line {line}: {message}")]
    MalformedRecord { line: usize, message: String },

    /// Underlying I/O failure.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// One observed activity sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    case_id: String,
    activities: Vec<String>,
    raw_text: Option<String>,
}

impl Trace {
    /// Builds a trace from activity labels, validating each label.
    pub fn new<I, S>(case_id: impl Into<String>, labels: I) -> Result<Self, LogError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let case_id = case_id.into();
        let activities: Vec<String> = labels.into_iter().map(Into::into).collect();
        for (position, label) in activities.iter().enumerate() {
            if label.trim().is_empty() {
                return Err(LogError::EmptyLabel {
                    case_id,
                    position,
                });
            }
        }
        Ok(Self {
            case_id,
            activities,
            raw_text: None,
        })
    }

    /// Attaches the source text the trace was extracted from.
    pub fn with_raw_text(mut self, text: impl Into<String>) -> Self {
        self.raw_text = Some(text.into());
        self
    }

    pub fn case_id(&self) -> &str {
        &self.case_id
    }

    pub fn activities(&self) -> &[String] {
        &self.activities
    }

    pub fn raw_text(&self) -> Option<&str> {
        self.raw_text.as_deref()
    }

    pub fn len(&self) -> usize {
        self.activities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.activities.is_empty()
    }
}

/// A collection of traces with unique case ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventLog {
    traces: Vec<Trace>,
}

impl EventLog {
    /// Builds a log, rejecting duplicate case ids.
    pub fn new(traces: Vec<Trace>) -> Result<Self, LogError> {
        let mut seen = BTreeSet::new();
        for trace in &traces {
            if !seen.insert(trace.case_id.clone()) {
                return Err(LogError::DuplicateCaseId(trace.case_id.clone()));
            }
        }
        Ok(Self { traces })
    }

    /// Convenience constructor for the common single-trace case.
    pub fn from_trace(trace: Trace) -> Self {
        Self {
            traces: vec![trace],
        }
    }

    pub fn traces(&self) -> &[Trace] {
        &self.traces
    }

    pub fn is_empty(&self) -> bool {
        self.traces.is_empty()
    }

    pub fn len(&self) -> usize {
        self.traces.len()
    }

    /// The set of distinct activity labels across all traces.
    pub fn alphabet(&self) -> BTreeSet<String> {
        self.traces
            .iter()
            .flat_map(|t| t.activities.iter().cloned())
            .collect()
    }
}

/// Directly-follows summary of a log: nodes, directed edges with counts, and
/// the activities observed first and last in at least one trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectlyFollowsGraph {
    nodes: BTreeSet<String>,
    edges: BTreeMap<(String, String), u64>,
    start_activities: BTreeSet<String>,
    end_activities: BTreeSet<String>,
}

impl DirectlyFollowsGraph {
    /// Builds the graph from a log; empty traces contribute nothing.
    pub fn from_log(log: &EventLog) -> Self {
        Self::from_sequences(log.traces.iter().map(|t| t.activities.as_slice()))
    }

    /// Builds the graph from raw activity sequences.
    pub fn from_sequences<'a, I>(sequences: I) -> Self
    where
        I: IntoIterator<Item = &'a [String]>,
    {
        let mut nodes = BTreeSet::new();
        let mut edges: BTreeMap<(String, String), u64> = BTreeMap::new();
        let mut start_activities = BTreeSet::new();
        let mut end_activities = BTreeSet::new();
        for seq in sequences {
            if let Some(first) = seq.first() {
                start_activities.insert(first.clone());
            }
            if let Some(last) = seq.last() {
                end_activities.insert(last.clone());
            }
            for label in seq {
                nodes.insert(label.clone());
            }
            for pair in seq.windows(2) {
                *edges
                    .entry((pair[0].clone(), pair[1].clone()))
                    .or_insert(0) += 1;
            }
        }
        Self {
            nodes,
            edges,
            start_activities,
            end_activities,
        }
    }

    pub fn nodes(&self) -> &BTreeSet<String> {
        &self.nodes
    }

    /// Directed edges with the number of times each was observed.
    pub fn edges(&self) -> &BTreeMap<(String, String), u64> {
        &self.edges
    }

    pub fn has_edge(&self, from: &str, to: &str) -> bool {
        self.edges
            .contains_key(&(from.to_string(), to.to_string()))
    }

    pub fn start_activities(&self) -> &BTreeSet<String> {
        &self.start_activities
    }

    pub fn end_activities(&self) -> &BTreeSet<String> {
        &self.end_activities
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace(id: &str, labels: &[&str]) -> Trace {
        Trace::new(id, labels.iter().copied()).unwrap()
    }

    // --- trace and log construction ---

    #[test]
    fn trace_rejects_empty_label() {
        let err = Trace::new("t1", ["a", "  ", "b"]).unwrap_err();
        assert!(matches!(err, LogError::EmptyLabel { position: 1, .. }));
    }

    #[test]
    fn trace_keeps_order_and_duplicates() {
        let t = trace("t1", &["a", "b", "a"]);
        assert_eq!(t.activities(), ["a", "b", "a"]);
        assert_eq!(t.len(), 3);
    }

    #[test]
    fn empty_trace_is_allowed() {
        let t = Trace::new("t1", Vec::<String>::new()).unwrap();
        assert!(t.is_empty());
    }

    #[test]
    fn log_rejects_duplicate_case_ids() {
        let err = EventLog::new(vec![trace("t1", &["a"]), trace("t1", &["b"])]).unwrap_err();
        assert!(matches!(err, LogError::DuplicateCaseId(id) if id == "t1"));
    }

    #[test]
    fn alphabet_collects_distinct_labels() {
        let log = EventLog::new(vec![trace("t1", &["a", "b"]), trace("t2", &["b", "c"])]).unwrap();
        let alphabet: Vec<String> = log.alphabet().into_iter().collect();
        assert_eq!(alphabet, ["a", "b", "c"]);
    }

    // --- directly-follows graph ---

    #[test]
    fn dfg_counts_repeated_edges() {
        let log = EventLog::new(vec![trace("t1", &["a", "b", "a", "b"])]).unwrap();
        let dfg = DirectlyFollowsGraph::from_log(&log);
        assert_eq!(dfg.edges()[&("a".into(), "b".into())], 2);
        assert_eq!(dfg.edges()[&("b".into(), "a".into())], 1);
        assert_eq!(
            dfg.start_activities().iter().collect::<Vec<_>>(),
            ["a"]
        );
        assert_eq!(dfg.end_activities().iter().collect::<Vec<_>>(), ["b"]);
    }

    #[test]
    fn dfg_ignores_empty_traces() {
        let log = EventLog::new(vec![
            Trace::new("t1", Vec::<String>::new()).unwrap(),
            trace("t2", &["a"]),
        ])
        .unwrap();
        let dfg = DirectlyFollowsGraph::from_log(&log);
        assert_eq!(dfg.nodes().len(), 1);
        assert!(dfg.edges().is_empty());
        assert_eq!(dfg.start_activities(), dfg.end_activities());
    }

    #[test]
    fn singleton_trace_has_same_start_and_end() {
        let log = EventLog::new(vec![trace("t1", &["a"])]).unwrap();
        let dfg = DirectlyFollowsGraph::from_log(&log);
        assert!(dfg.start_activities().contains("a"));
        assert!(dfg.end_activities().contains("a"));
        assert!(dfg.edges().is_empty());
    }
}
