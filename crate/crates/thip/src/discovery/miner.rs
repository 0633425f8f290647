//! Inductive discovery of process trees from event logs.
//!
//! [`discover_tree`] recursively partitions the log's directly-follows graph.
//! At each level it tries, in order: an exclusive-choice cut (weakly
//! connected components), a sequence cut (a strict order between activity
//! groups), a parallel cut (groups fully connected in both directions, each
//! containing a start and an end activity), and a loop cut (a body holding
//! all start and end activities plus redo parts entered only from ends and
//! left only into starts). When no cut applies it falls back to a flower
//! model, a loop of a free choice over the alphabet, which accepts any
//! non-empty sequence over the remaining activities. Every trace of the
//! input log replays on the discovered model.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::tree::ProcessTree;
use crate::eventlog::{DirectlyFollowsGraph, EventLog};

/// Errors raised by process discovery.
#[derive(Debug, Error)]
pub enum DiscoveryError {
    /// The log contains no traces at all.
    #[error("EmptyLog: cannot discover a model from a log with no traces")]
    EmptyLog,

    /// Every trace in the log is empty, so there is no alphabet to model.
    #[error("EmptyAlphabet: cannot discover a model from a log with no activities")]
    EmptyAlphabet,
}

/// Discovers a process tree that replays every trace in `log`.
pub fn discover_tree(log: &EventLog) -> Result<ProcessTree, DiscoveryError> {
    if log.is_empty() {
        return Err(DiscoveryError::EmptyLog);
    }
    if log.traces().iter().all(|t| t.is_empty()) {
        return Err(DiscoveryError::EmptyAlphabet);
    }
    let sequences: Vec<Vec<String>> = log
        .traces()
        .iter()
        .map(|t| t.activities().to_vec())
        .collect();
    Ok(mine(sequences))
}

type Part = BTreeSet<String>;

fn mine(traces: Vec<Vec<String>>) -> ProcessTree {
    let non_empty: Vec<Vec<String>> = traces.iter().filter(|t| !t.is_empty()).cloned().collect();
    if non_empty.is_empty() {
        return ProcessTree::Silent;
    }
    if non_empty.len() < traces.len() {
        return ProcessTree::Choice(vec![mine(non_empty), ProcessTree::Silent]);
    }

    let dfg = DirectlyFollowsGraph::from_sequences(traces.iter().map(|t| t.as_slice()));
    let alphabet = dfg.nodes().clone();
    if alphabet.len() == 1 {
        let label = alphabet.iter().next().expect("non-empty alphabet").clone();
        if traces.iter().all(|t| t.len() == 1) {
            return ProcessTree::Leaf(label);
        }
        return flower(&alphabet);
    }

    if let Some(parts) = exclusive_choice_cut(&dfg) {
        let children = parts
            .iter()
            .map(|part| mine(project_whole_traces(&traces, part)))
            .collect();
        return ProcessTree::Choice(children);
    }
    if let Some(parts) = sequence_cut(&dfg) {
        let children = split_sequence(&traces, &parts)
            .into_iter()
            .map(mine)
            .collect();
        return ProcessTree::Sequence(children);
    }
    if let Some(parts) = parallel_cut(&dfg) {
        let children = parts
            .iter()
            .map(|part| mine(project_events(&traces, part)))
            .collect();
        return ProcessTree::Parallel(children);
    }
    if let Some((body, redos)) = loop_cut(&dfg) {
        let sublogs = split_loop(&traces, &body, &redos);
        let children = sublogs.into_iter().map(mine).collect();
        return ProcessTree::Loop(children);
    }
    flower(&alphabet)
}

/// Loop of a free choice over the alphabet: accepts any non-empty sequence.
fn flower(alphabet: &BTreeSet<String>) -> ProcessTree {
    let body = if alphabet.len() == 1 {
        ProcessTree::Leaf(alphabet.iter().next().expect("non-empty").clone())
    } else {
        ProcessTree::Choice(
            alphabet
                .iter()
                .map(|label| ProcessTree::Leaf(label.clone()))
                .collect(),
        )
    };
    ProcessTree::Loop(vec![body, ProcessTree::Silent])
}

/// Connected components of the undirected view of the graph, sorted by their
/// smallest label.
fn undirected_components(
    nodes: &BTreeSet<String>,
    neighbors: &BTreeMap<String, BTreeSet<String>>,
) -> Vec<Part> {
    let mut assigned: BTreeSet<&String> = BTreeSet::new();
    let mut components = Vec::new();
    for start in nodes {
        if assigned.contains(start) {
            continue;
        }
        let mut component = BTreeSet::new();
        let mut stack = vec![start];
        while let Some(node) = stack.pop() {
            if !assigned.insert(node) {
                continue;
            }
            component.insert(node.clone());
            if let Some(next) = neighbors.get(node) {
                for n in next {
                    if !assigned.contains(n) {
                        stack.push(n);
                    }
                }
            }
        }
        components.push(component);
    }
    components
}

fn exclusive_choice_cut(dfg: &DirectlyFollowsGraph) -> Option<Vec<Part>> {
    let mut neighbors: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (from, to) in dfg.edges().keys() {
        neighbors
            .entry(from.clone())
            .or_default()
            .insert(to.clone());
        neighbors
            .entry(to.clone())
            .or_default()
            .insert(from.clone());
    }
    let components = undirected_components(dfg.nodes(), &neighbors);
    (components.len() >= 2).then_some(components)
}

/// Transitive reachability over the directed edges.
fn reachability(dfg: &DirectlyFollowsGraph) -> BTreeMap<String, BTreeSet<String>> {
    let mut successors: BTreeMap<&String, Vec<&String>> = BTreeMap::new();
    for (from, to) in dfg.edges().keys() {
        successors.entry(from).or_default().push(to);
    }
    let mut closure = BTreeMap::new();
    for node in dfg.nodes() {
        let mut reached: BTreeSet<String> = BTreeSet::new();
        let mut stack: Vec<&String> = successors.get(node).cloned().unwrap_or_default();
        while let Some(next) = stack.pop() {
            if reached.insert(next.clone()) {
                if let Some(more) = successors.get(next) {
                    stack.extend(more.iter().copied());
                }
            }
        }
        closure.insert(node.clone(), reached);
    }
    closure
}

fn part_reaches(closure: &BTreeMap<String, BTreeSet<String>>, from: &Part, to: &Part) -> bool {
    from.iter()
        .any(|a| to.iter().any(|b| closure[a].contains(b)))
}

/// Finds a strict order over activity groups: merge strongly connected and
/// mutually unreachable groups until every remaining pair is one-way
/// reachable, then order the groups along that relation.
fn sequence_cut(dfg: &DirectlyFollowsGraph) -> Option<Vec<Part>> {
    let closure = reachability(dfg);
    let mut groups: Vec<Part> = Vec::new();
    let mut placed: BTreeSet<String> = BTreeSet::new();
    for node in dfg.nodes() {
        if placed.contains(node) {
            continue;
        }
        let mut group = BTreeSet::from([node.clone()]);
        for other in dfg.nodes() {
            if other != node
                && closure[node].contains(other)
                && closure[other].contains(node)
            {
                group.insert(other.clone());
            }
        }
        placed.extend(group.iter().cloned());
        groups.push(group);
    }

    loop {
        let mut merge_pair = None;
        'outer: for i in 0..groups.len() {
            for j in (i + 1)..groups.len() {
                let forward = part_reaches(&closure, &groups[i], &groups[j]);
                let backward = part_reaches(&closure, &groups[j], &groups[i]);
                if forward == backward {
                    merge_pair = Some((i, j));
                    break 'outer;
                }
            }
        }
        match merge_pair {
            Some((i, j)) => {
                let other = groups.remove(j);
                groups[i].extend(other);
            }
            None => break,
        }
    }

    if groups.len() < 2 {
        return None;
    }
    groups.sort_by(|a, b| {
        if part_reaches(&closure, a, b) {
            std::cmp::Ordering::Less
        } else {
            std::cmp::Ordering::Greater
        }
    });
    Some(groups)
}

/// Finds groups that are pairwise fully connected in both directions, each
/// holding at least one start and one end activity. Groups failing the
/// start/end requirement merge into their successor until all qualify.
fn parallel_cut(dfg: &DirectlyFollowsGraph) -> Option<Vec<Part>> {
    let mut neighbors: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for a in dfg.nodes() {
        for b in dfg.nodes() {
            if a >= b {
                continue;
            }
            if !(dfg.has_edge(a, b) && dfg.has_edge(b, a)) {
                neighbors.entry(a.clone()).or_default().insert(b.clone());
                neighbors.entry(b.clone()).or_default().insert(a.clone());
            }
        }
    }
    let mut parts = undirected_components(dfg.nodes(), &neighbors);
    if parts.len() < 2 {
        return None;
    }

    let valid = |part: &Part| {
        part.iter().any(|a| dfg.start_activities().contains(a))
            && part.iter().any(|a| dfg.end_activities().contains(a))
    };
    while parts.len() >= 2 {
        match parts.iter().position(|p| !valid(p)) {
            None => break,
            Some(i) => {
                let merged = parts.remove(i);
                let target = if i < parts.len() { i } else { i - 1 };
                parts[target].extend(merged);
                parts.sort_by(|a, b| a.iter().next().cmp(&b.iter().next()));
            }
        }
    }
    (parts.len() >= 2 && parts.iter().all(valid)).then_some(parts)
}

/// Finds a loop body (all start and end activities) and redo parts. A redo
/// part may only be entered from end activities, may only exit into start
/// activities, and must connect to all of them.
fn loop_cut(dfg: &DirectlyFollowsGraph) -> Option<(Part, Vec<Part>)> {
    let starts = dfg.start_activities();
    let ends = dfg.end_activities();
    let mut body: Part = starts.union(ends).cloned().collect();
    let rest: BTreeSet<String> = dfg.nodes().difference(&body).cloned().collect();
    if rest.is_empty() {
        return None;
    }

    let mut neighbors: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (from, to) in dfg.edges().keys() {
        if rest.contains(from) && rest.contains(to) {
            neighbors
                .entry(from.clone())
                .or_default()
                .insert(to.clone());
            neighbors
                .entry(to.clone())
                .or_default()
                .insert(from.clone());
        }
    }
    let candidates = undirected_components(&rest, &neighbors);

    let mut redos = Vec::new();
    for candidate in candidates {
        let mut entries: BTreeSet<&String> = BTreeSet::new();
        let mut exits: BTreeSet<&String> = BTreeSet::new();
        let mut valid = true;
        for (from, to) in dfg.edges().keys() {
            let from_in = candidate.contains(from);
            let to_in = candidate.contains(to);
            if !from_in && to_in {
                if !ends.contains(from) {
                    valid = false;
                    break;
                }
                entries.insert(to);
            } else if from_in && !to_in {
                if !starts.contains(to) {
                    valid = false;
                    break;
                }
                exits.insert(from);
            }
        }
        if valid {
            for entry in &entries {
                if !ends.iter().all(|e| dfg.has_edge(e, entry)) {
                    valid = false;
                    break;
                }
            }
        }
        if valid {
            for exit in &exits {
                if !starts.iter().all(|s| dfg.has_edge(exit, s)) {
                    valid = false;
                    break;
                }
            }
        }
        if valid {
            redos.push(candidate);
        } else {
            body.extend(candidate);
        }
    }
    (!redos.is_empty()).then_some((body, redos))
}

/// Keeps whole traces whose activities fall in `part`. Used for
/// exclusive-choice cuts, where each trace lives entirely in one part.
fn project_whole_traces(traces: &[Vec<String>], part: &Part) -> Vec<Vec<String>> {
    traces
        .iter()
        .filter(|t| part.contains(&t[0]))
        .cloned()
        .collect()
}

/// Drops events outside `part` from every trace.
fn project_events(traces: &[Vec<String>], part: &Part) -> Vec<Vec<String>> {
    traces
        .iter()
        .map(|t| {
            t.iter()
                .filter(|a| part.contains(*a))
                .cloned()
                .collect()
        })
        .collect()
}

/// Splits every trace at the boundaries of the ordered sequence parts,
/// producing one sublog per part.
fn split_sequence(traces: &[Vec<String>], parts: &[Part]) -> Vec<Vec<Vec<String>>> {
    let part_of: BTreeMap<&String, usize> = parts
        .iter()
        .enumerate()
        .flat_map(|(i, part)| part.iter().map(move |a| (a, i)))
        .collect();
    let mut sublogs = vec![Vec::new(); parts.len()];
    for trace in traces {
        let mut segments = vec![Vec::new(); parts.len()];
        let mut highest = 0usize;
        for activity in trace {
            let index = part_of[activity];
            debug_assert!(index >= highest, "sequence split saw an order violation");
            highest = highest.max(index);
            segments[index].push(activity.clone());
        }
        for (index, segment) in segments.into_iter().enumerate() {
            sublogs[index].push(segment);
        }
    }
    sublogs
}

/// Splits every trace into maximal runs inside the body or one redo part.
/// Returns the body sublog first, then one sublog per redo part.
fn split_loop(traces: &[Vec<String>], body: &Part, redos: &[Part]) -> Vec<Vec<Vec<String>>> {
    let part_of = |activity: &String| -> usize {
        if body.contains(activity) {
            return 0;
        }
        redos
            .iter()
            .position(|r| r.contains(activity))
            .map(|i| i + 1)
            .expect("loop split covers the alphabet")
    };
    let mut sublogs = vec![Vec::new(); redos.len() + 1];
    for trace in traces {
        let mut current_part = 0usize;
        let mut run: Vec<String> = Vec::new();
        for activity in trace {
            let part = part_of(activity);
            if part != current_part {
                sublogs[current_part].push(std::mem::take(&mut run));
                current_part = part;
            }
            run.push(activity.clone());
        }
        sublogs[current_part].push(run);
        debug_assert_eq!(current_part, 0, "loop split must end in the body");
    }
    sublogs
}
