//! Shared oracles and generators for the integration suites.
//!
//! The alignment oracle here deliberately avoids the library's best-first
//! search: it runs a plain label-correcting relaxation over the joint
//! (marking, position) space until no cost improves, so agreement between
//! the two is meaningful evidence of optimality.

use std::collections::BTreeMap;

use rand::Rng;
use thip::discovery::{Marking, PetriNet, ProcessTree};
use thip::eventlog::{EventLog, Trace};

/// Minimal alignment cost between `trace` and `net` under unit costs for
/// log moves and visible model moves, or `None` when the final marking is
/// unreachable. Exhaustive: every reachable joint state is relaxed until
/// a fixed point.
pub fn oracle_alignment_cost(net: &PetriNet, trace: &[String]) -> Option<u32> {
    let start = (net.initial_marking().clone(), 0usize);
    let mut best: BTreeMap<(Marking, usize), u32> = BTreeMap::new();
    best.insert(start.clone(), 0);
    let mut worklist = vec![start];

    while let Some((marking, position)) = worklist.pop() {
        let cost = best[&(marking.clone(), position)];
        let mut relax = |state: (Marking, usize), candidate: u32, worklist: &mut Vec<_>| {
            let known = best.get(&state).copied().unwrap_or(u32::MAX);
            if candidate < known {
                best.insert(state.clone(), candidate);
                worklist.push(state);
            }
        };

        if position < trace.len() {
            relax((marking.clone(), position + 1), cost + 1, &mut worklist);
        }
        for t in net.enabled_transitions(&marking) {
            let next = net.fire(&marking, t).expect("enabled transition fires");
            match &net.transitions()[t.0].label {
                None => relax((next, position), cost, &mut worklist),
                Some(label) => {
                    if position < trace.len() && trace[position] == *label {
                        relax((next.clone(), position + 1), cost, &mut worklist);
                    }
                    relax((next, position), cost + 1, &mut worklist);
                }
            }
        }
    }
    best.get(&(net.final_marking().clone(), trace.len())).copied()
}

/// A random log within the miner stress envelope: up to `max_traces`
/// traces over up to `max_activities` labels, each up to `max_len` long.
/// Roughly one trace in eight is empty.
pub fn random_log<R: Rng>(
    rng: &mut R,
    max_traces: usize,
    max_activities: usize,
    max_len: usize,
) -> EventLog {
    let alphabet: Vec<String> = (0..rng.gen_range(1..=max_activities))
        .map(|i| format!("act{i}"))
        .collect();
    let n_traces = rng.gen_range(1..=max_traces);
    let traces = (0..n_traces)
        .map(|i| {
            let len = if rng.gen_ratio(1, 8) {
                0
            } else {
                rng.gen_range(1..=max_len)
            };
            let events: Vec<String> = (0..len)
                .map(|_| alphabet[rng.gen_range(0..alphabet.len())].clone())
                .collect();
            Trace::new(format!("case{i}"), events).expect("labels are non-blank")
        })
        .collect();
    EventLog::new(traces).expect("case ids are distinct")
}

/// A random well-formed process tree over `alphabet` with at most
/// `budget` leaves.
pub fn random_tree<R: Rng>(rng: &mut R, alphabet: &[String], budget: usize) -> ProcessTree {
    if budget <= 1 || rng.gen_ratio(1, 3) {
        return if rng.gen_ratio(1, 6) {
            ProcessTree::Silent
        } else {
            ProcessTree::leaf(alphabet[rng.gen_range(0..alphabet.len())].clone())
        };
    }
    let arms = rng.gen_range(2..=budget.min(3));
    let share = (budget / arms).max(1);
    let children: Vec<ProcessTree> = (0..arms)
        .map(|_| random_tree(rng, alphabet, share))
        .collect();
    match rng.gen_range(0..4) {
        0 => ProcessTree::Sequence(children),
        1 => ProcessTree::Choice(children),
        2 => ProcessTree::Parallel(children),
        _ => ProcessTree::Loop(children),
    }
}

/// A random trace related to `tree`: either a genuine sample, a mutated
/// sample, or label noise. Always at most `max_len` events.
pub fn random_trace_for<R: Rng>(
    rng: &mut R,
    tree: &ProcessTree,
    alphabet: &[String],
    max_len: usize,
) -> Vec<String> {
    let mut events = match rng.gen_range(0..3) {
        0 => tree.sample(rng),
        1 => {
            let mut sample = tree.sample(rng);
            if !sample.is_empty() && rng.gen_bool(0.5) {
                sample.remove(rng.gen_range(0..sample.len()));
            }
            let extra = alphabet[rng.gen_range(0..alphabet.len())].clone();
            sample.insert(rng.gen_range(0..=sample.len()), extra);
            sample
        }
        _ => {
            let len = rng.gen_range(0..=max_len);
            (0..len)
                .map(|_| {
                    if rng.gen_ratio(1, 5) {
                        "foreign".to_string()
                    } else {
                        alphabet[rng.gen_range(0..alphabet.len())].clone()
                    }
                })
                .collect()
        }
    };
    events.truncate(max_len);
    events
}
