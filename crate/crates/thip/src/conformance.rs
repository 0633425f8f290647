//! Alignment-based conformance checking.
//!
//! An alignment explains a trace against a net as a cheapest sequence of
//! moves: synchronous moves (trace and model agree, cost 0), log moves (the
//! trace has an event the model cannot mirror, cost 1), and model moves (the
//! model fires without a matching event; cost 1 when visible, 0 when
//! silent). [`align`] finds a provably cheapest alignment with a uniform
//! cost search over (marking, trace position) states.
//!
//! From alignments this module derives fitness (1 minus cost over the worst
//! case of deleting the whole trace and walking the model's shortest visible
//! path), escaping-edges precision (the fraction of model-enabled activities
//! actually observed, averaged over the aligned run's prefixes), and their
//! harmonic mean.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use crate::discovery::{Marking, PetriNet};
use crate::eventlog::EventLog;

/// Errors raised during conformance checking.
#[derive(Debug, Error)]
pub enum ConformanceError {
    /// The net cannot reach its final marking at all, so no alignment exists.
    #[error("FinalMarkingUnreachable: the net admits no run from its initial to its final marking")]
    FinalMarkingUnreachable,

    /// The alignment search visited more states than allowed.
    #[error("StateBoundExceeded: alignment search visited more than {0} states")]
    StateBoundExceeded(usize),

    /// Conformance over a log needs at least one trace.
    #[error("EmptyTeacherLog: conformance over a log requires at least one trace")]
    EmptyTeacherLog,
}

/// Per-move-kind costs. Synchronous and silent model moves are always free.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MoveCosts {
    pub log_move: u32,
    pub visible_model_move: u32,
}

impl Default for MoveCosts {
    fn default() -> Self {
        Self {
            log_move: 1,
            visible_model_move: 1,
        }
    }
}

/// Search controls for [`align_with`].
#[derive(Debug, Clone, Copy)]
pub struct AlignOptions {
    pub costs: MoveCosts,
    /// Cap on visited (marking, position) states.
    pub state_bound: usize,
}

/// Default cap on visited states for alignment search.
pub const ALIGN_STATE_BOUND: usize = 1_000_000;

impl Default for AlignOptions {
    fn default() -> Self {
        Self {
            costs: MoveCosts::default(),
            state_bound: ALIGN_STATE_BOUND,
        }
    }
}

/// One step of an alignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AlignmentMove {
    /// Trace event and a model transition with the same label advance together.
    Synchronous { label: String },
    /// A trace event the model does not mirror.
    LogMove { label: String },
    /// A model transition firing without a trace event; `label` is `None`
    /// for silent transitions.
    ModelMove { label: Option<String> },
}

impl AlignmentMove {
    pub fn cost(&self, costs: &MoveCosts) -> u32 {
        match self {
            Self::Synchronous { .. } => 0,
            Self::LogMove { .. } => costs.log_move,
            Self::ModelMove { label: Some(_) } => costs.visible_model_move,
            Self::ModelMove { label: None } => 0,
        }
    }
}

/// A cheapest explanation of a trace against a net.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alignment {
    pub moves: Vec<AlignmentMove>,
    pub total_cost: u32,
}

impl Alignment {
    /// The trace events covered by the alignment, in order.
    pub fn log_projection(&self) -> Vec<&str> {
        self.moves
            .iter()
            .filter_map(|m| match m {
                AlignmentMove::Synchronous { label } | AlignmentMove::LogMove { label } => {
                    Some(label.as_str())
                }
                AlignmentMove::ModelMove { .. } => None,
            })
            .collect()
    }

    /// The visible model run of the alignment, in order.
    pub fn model_projection(&self) -> Vec<&str> {
        self.moves
            .iter()
            .filter_map(|m| match m {
                AlignmentMove::Synchronous { label } => Some(label.as_str()),
                AlignmentMove::ModelMove { label } => label.as_deref(),
                AlignmentMove::LogMove { .. } => None,
            })
            .collect()
    }
}

/// Fitness, precision, and their harmonic mean for one model/log pair.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ConformanceResult {
    pub fitness: f64,
    pub precision: f64,
    pub f1: f64,
}

impl ConformanceResult {
    pub fn new(fitness: f64, precision: f64) -> Self {
        Self {
            fitness,
            precision,
            f1: f1_score(fitness, precision),
        }
    }
}

/// Harmonic mean of fitness and precision, with `0/0` defined as 0.
pub fn f1_score(fitness: f64, precision: f64) -> f64 {
    if fitness + precision == 0.0 {
        0.0
    } else {
        2.0 * fitness * precision / (fitness + precision)
    }
}

#[derive(PartialEq, Eq)]
struct QueueEntry {
    cost: u32,
    order: u64,
    marking: Marking,
    position: usize,
}

impl Ord for QueueEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .cmp(&self.cost)
            .then_with(|| other.order.cmp(&self.order))
    }
}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Finds a cheapest alignment of `trace` against `net` with default costs.
pub fn align(net: &PetriNet, trace: &[String]) -> Result<Alignment, ConformanceError> {
    align_with(net, trace, &AlignOptions::default())
}

/// Finds a cheapest alignment under explicit costs and search bounds.
///
/// Runs uniform-cost search over (marking, trace position) states, so the
/// returned cost is minimal. Ties resolve toward the earliest-queued state,
/// which makes the returned move sequence deterministic.
pub fn align_with(
    net: &PetriNet,
    trace: &[String],
    options: &AlignOptions,
) -> Result<Alignment, ConformanceError> {
    type State = (Marking, usize);
    let goal: State = (net.final_marking().clone(), trace.len());
    let start: State = (net.initial_marking().clone(), 0);

    let mut best: HashMap<State, u32> = HashMap::new();
    let mut parent: HashMap<State, (State, AlignmentMove)> = HashMap::new();
    let mut queue: BinaryHeap<QueueEntry> = BinaryHeap::new();
    let mut order = 0u64;

    best.insert(start.clone(), 0);
    queue.push(QueueEntry {
        cost: 0,
        order,
        marking: start.0.clone(),
        position: start.1,
    });

    while let Some(entry) = queue.pop() {
        let state = (entry.marking, entry.position);
        if best.get(&state) != Some(&entry.cost) {
            continue;
        }
        if state == goal {
            let mut moves = Vec::new();
            let mut cursor = state;
            while let Some((prev, mv)) = parent.get(&cursor) {
                moves.push(mv.clone());
                cursor = prev.clone();
            }
            moves.reverse();
            return Ok(Alignment {
                moves,
                total_cost: entry.cost,
            });
        }

        let mut relax = |next: State,
                         cost: u32,
                         mv: AlignmentMove,
                         queue: &mut BinaryHeap<QueueEntry>,
                         best: &mut HashMap<State, u32>,
                         parent: &mut HashMap<State, (State, AlignmentMove)>|
         -> Result<(), ConformanceError> {
            let improved = match best.get(&next) {
                Some(&known) => cost < known,
                None => true,
            };
            if improved {
                if best.len() >= options.state_bound && !best.contains_key(&next) {
                    return Err(ConformanceError::StateBoundExceeded(options.state_bound));
                }
                best.insert(next.clone(), cost);
                parent.insert(next.clone(), (state.clone(), mv));
                order += 1;
                queue.push(QueueEntry {
                    cost,
                    order,
                    marking: next.0,
                    position: next.1,
                });
            }
            Ok(())
        };

        if state.1 < trace.len() {
            let label = trace[state.1].clone();
            relax(
                (state.0.clone(), state.1 + 1),
                entry.cost + options.costs.log_move,
                AlignmentMove::LogMove { label },
                &mut queue,
                &mut best,
                &mut parent,
            )?;
        }
        for t in net.transition_ids() {
            if !net.is_enabled(&state.0, t) {
                continue;
            }
            let fired = net.fire(&state.0, t).expect("enabled transition fires");
            match net.label(t) {
                None => {
                    relax(
                        (fired.clone(), state.1),
                        entry.cost,
                        AlignmentMove::ModelMove { label: None },
                        &mut queue,
                        &mut best,
                        &mut parent,
                    )?;
                }
                Some(label) => {
                    relax(
                        (fired.clone(), state.1),
                        entry.cost + options.costs.visible_model_move,
                        AlignmentMove::ModelMove {
                            label: Some(label.to_string()),
                        },
                        &mut queue,
                        &mut best,
                        &mut parent,
                    )?;
                    if state.1 < trace.len() && label == trace[state.1] {
                        relax(
                            (fired, state.1 + 1),
                            entry.cost,
                            AlignmentMove::Synchronous {
                                label: label.to_string(),
                            },
                            &mut queue,
                            &mut best,
                            &mut parent,
                        )?;
                    }
                }
            }
        }
    }
    Err(ConformanceError::FinalMarkingUnreachable)
}

/// Cost of the net's cheapest run in visible model moves: an alignment of
/// the empty trace.
pub fn shortest_visible_cost(net: &PetriNet) -> Result<u32, ConformanceError> {
    Ok(align(net, &[])?.total_cost)
}

/// Trace fitness: 1 minus alignment cost over the worst-case cost of
/// explaining the trace and the model separately. A degenerate worst case of
/// zero (empty trace against a silent-only net) scores 1.
pub fn fitness(net: &PetriNet, trace: &[String]) -> Result<f64, ConformanceError> {
    let costs = MoveCosts::default();
    let alignment = align(net, trace)?;
    let worst = trace.len() as u32 * costs.log_move
        + shortest_visible_cost(net)? * costs.visible_model_move;
    if worst == 0 {
        return Ok(1.0);
    }
    Ok(1.0 - f64::from(alignment.total_cost) / f64::from(worst))
}

/// All markings reachable from `seeds` through silent transitions only.
fn silent_closure(
    net: &PetriNet,
    seeds: BTreeSet<Marking>,
    bound: usize,
) -> Result<BTreeSet<Marking>, ConformanceError> {
    let mut closed = seeds;
    let mut frontier: VecDeque<Marking> = closed.iter().cloned().collect();
    while let Some(marking) = frontier.pop_front() {
        for t in net.transition_ids() {
            if net.label(t).is_some() || !net.is_enabled(&marking, t) {
                continue;
            }
            let fired = net.fire(&marking, t).expect("enabled transition fires");
            if closed.insert(fired.clone()) {
                if closed.len() > bound {
                    return Err(ConformanceError::StateBoundExceeded(bound));
                }
                frontier.push_back(fired);
            }
        }
    }
    Ok(closed)
}

/// Visible labels enabled in any marking of the set.
fn enabled_labels(net: &PetriNet, markings: &BTreeSet<Marking>) -> BTreeSet<String> {
    let mut labels = BTreeSet::new();
    for marking in markings {
        for t in net.transition_ids() {
            if let Some(label) = net.label(t) {
                if net.is_enabled(marking, t) {
                    labels.insert(label.to_string());
                }
            }
        }
    }
    labels
}

/// Markings reachable by firing one `label` transition from any marking,
/// saturated with silent moves.
fn step_markings(
    net: &PetriNet,
    markings: &BTreeSet<Marking>,
    label: &str,
    bound: usize,
) -> Result<BTreeSet<Marking>, ConformanceError> {
    let mut next = BTreeSet::new();
    for marking in markings {
        for t in net.transition_ids() {
            if net.label(t) == Some(label) && net.is_enabled(marking, t) {
                next.insert(net.fire(marking, t).expect("enabled transition fires"));
            }
        }
    }
    silent_closure(net, next, bound)
}

/// Escaping-edges precision of `net` against `log`.
///
/// Each trace is first aligned and projected onto its visible model run, so
/// the measured states all lie inside the model's behavior. Every prefix of
/// every projected run contributes one observation: the number of distinct
/// activities the log continues with from that prefix, over the number the
/// model enables there. Precision is the visit-weighted average. A model
/// allowing only observed behavior scores 1; one allowing many unobserved
/// continuations scores low.
pub fn precision(net: &PetriNet, log: &EventLog) -> Result<f64, ConformanceError> {
    let options = AlignOptions::default();
    let mut projections: Vec<Vec<String>> = Vec::new();
    for trace in log.traces() {
        let alignment = align_with(net, trace.activities(), &options)?;
        projections.push(
            alignment
                .model_projection()
                .into_iter()
                .map(str::to_string)
                .collect(),
        );
    }

    let mut executed: HashMap<Vec<String>, BTreeSet<String>> = HashMap::new();
    let mut visits: HashMap<Vec<String>, u64> = HashMap::new();
    for run in &projections {
        for i in 0..run.len() {
            let prefix = run[..i].to_vec();
            executed.entry(prefix.clone()).or_default().insert(run[i].clone());
            *visits.entry(prefix).or_insert(0) += 1;
        }
    }
    if visits.is_empty() {
        return Ok(1.0);
    }

    let mut enabled_count: HashMap<Vec<String>, usize> = HashMap::new();
    for run in &projections {
        let mut markings = silent_closure(
            net,
            BTreeSet::from([net.initial_marking().clone()]),
            options.state_bound,
        )?;
        for i in 0..run.len() {
            let prefix = run[..i].to_vec();
            enabled_count
                .entry(prefix)
                .or_insert_with(|| enabled_labels(net, &markings).len());
            markings = step_markings(net, &markings, &run[i], options.state_bound)?;
        }
    }

    let mut weighted = 0.0;
    let mut total = 0u64;
    let mut prefixes: Vec<&Vec<String>> = visits.keys().collect();
    prefixes.sort();
    for prefix in prefixes {
        let observed = executed[prefix].len();
        let enabled = enabled_count[prefix];
        let count = visits[prefix];
        debug_assert!(observed <= enabled, "observed labels must be enabled");
        if enabled > 0 {
            weighted += count as f64 * observed as f64 / enabled as f64;
        }
        total += count;
    }
    Ok(weighted / total as f64)
}

/// Checks `net` against a teacher log: mean alignment fitness over the
/// traces, escaping-edges precision, and their harmonic mean.
pub fn conformance_check(
    net: &PetriNet,
    teacher: &EventLog,
) -> Result<ConformanceResult, ConformanceError> {
    if teacher.is_empty() {
        return Err(ConformanceError::EmptyTeacherLog);
    }
    let mut fitness_sum = 0.0;
    for trace in teacher.traces() {
        fitness_sum += fitness(net, trace.activities())?;
    }
    let mean_fitness = fitness_sum / teacher.len() as f64;
    let precision = precision(net, teacher)?;
    Ok(ConformanceResult::new(mean_fitness, precision))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discovery::{tree_to_petri, NetBuilder, ProcessTree as T};
    use crate::eventlog::Trace;

    fn labels(items: &[&str]) -> Vec<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    fn seq_abc() -> PetriNet {
        tree_to_petri(&T::Sequence(vec![T::leaf("a"), T::leaf("b"), T::leaf("c")])).unwrap()
    }

    fn flower_abc() -> PetriNet {
        tree_to_petri(&T::Loop(vec![
            T::Choice(vec![T::leaf("a"), T::leaf("b"), T::leaf("c")]),
            T::Silent,
        ]))
        .unwrap()
    }

    fn one_trace_log(items: &[&str]) -> EventLog {
        EventLog::from_trace(Trace::new("teacher", items.iter().copied()).unwrap())
    }

    // --- alignment ---

    #[test]
    fn perfect_trace_aligns_with_zero_cost() {
        let alignment = align(&seq_abc(), &labels(&["a", "b", "c"])).unwrap();
        assert_eq!(alignment.total_cost, 0);
        assert_eq!(
            alignment.moves,
            vec![
                AlignmentMove::Synchronous { label: "a".into() },
                AlignmentMove::Synchronous { label: "b".into() },
                AlignmentMove::Synchronous { label: "c".into() },
            ]
        );
    }

    #[test]
    fn substituted_event_costs_one_log_and_one_model_move() {
        let alignment = align(&seq_abc(), &labels(&["a", "x", "c"])).unwrap();
        assert_eq!(alignment.total_cost, 2);
        let log_side = alignment.log_projection();
        assert_eq!(log_side, ["a", "x", "c"]);
        assert_eq!(alignment.model_projection(), ["a", "b", "c"]);
    }

    #[test]
    fn empty_trace_costs_the_shortest_visible_path() {
        let alignment = align(&seq_abc(), &[]).unwrap();
        assert_eq!(alignment.total_cost, 3);
        assert_eq!(shortest_visible_cost(&seq_abc()).unwrap(), 3);
    }

    #[test]
    fn silent_moves_are_free() {
        let net = tree_to_petri(&T::Choice(vec![T::leaf("a"), T::Silent])).unwrap();
        let alignment = align(&net, &[]).unwrap();
        assert_eq!(alignment.total_cost, 0);
        assert_eq!(shortest_visible_cost(&net).unwrap(), 0);
    }

    #[test]
    fn alignment_is_deterministic() {
        let net = flower_abc();
        let trace = labels(&["a", "b", "x", "c"]);
        let first = align(&net, &trace).unwrap();
        for _ in 0..5 {
            assert_eq!(align(&net, &trace).unwrap(), first);
        }
    }

    #[test]
    fn unreachable_final_marking_is_reported() {
        let mut builder = NetBuilder::new();
        let p0 = builder.add_place();
        let p1 = builder.add_place();
        let p2 = builder.add_place();
        let t = builder.add_transition(Some("a".into()));
        builder.arc_place_to_transition(p0, t);
        builder.arc_transition_to_place(t, p1);
        builder.set_initial(Marking::single(p0));
        builder.set_final(Marking::single(p2));
        let net = builder.build();
        assert!(matches!(
            align(&net, &labels(&["a"])),
            Err(ConformanceError::FinalMarkingUnreachable)
        ));
    }

    #[test]
    fn state_bound_is_enforced() {
        let net = flower_abc();
        let trace = labels(&["a", "b", "c", "a", "b", "c"]);
        let options = AlignOptions {
            costs: MoveCosts::default(),
            state_bound: 3,
        };
        assert!(matches!(
            align_with(&net, &trace, &options),
            Err(ConformanceError::StateBoundExceeded(3))
        ));
    }

    #[test]
    fn custom_costs_change_move_choice() {
        let net = seq_abc();
        let trace = labels(&["a", "x", "c"]);
        let options = AlignOptions {
            costs: MoveCosts {
                log_move: 5,
                visible_model_move: 1,
            },
            state_bound: ALIGN_STATE_BOUND,
        };
        let alignment = align_with(&net, &trace, &options).unwrap();
        assert_eq!(alignment.total_cost, 6);
    }

    // --- fitness ---

    #[test]
    fn fitness_is_one_for_replayable_trace() {
        assert_eq!(fitness(&seq_abc(), &labels(&["a", "b", "c"])).unwrap(), 1.0);
    }

    #[test]
    fn fitness_of_substituted_event() {
        let value = fitness(&seq_abc(), &labels(&["a", "x", "c"])).unwrap();
        assert!((value - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn fitness_of_empty_trace_is_zero() {
        assert_eq!(fitness(&seq_abc(), &[]).unwrap(), 0.0);
    }

    #[test]
    fn fitness_of_disjoint_trace_is_zero() {
        let value = fitness(&seq_abc(), &labels(&["d", "e"])).unwrap();
        assert_eq!(value, 0.0);
    }

    #[test]
    fn degenerate_worst_case_scores_one() {
        let net = tree_to_petri(&T::Silent).unwrap();
        assert_eq!(fitness(&net, &[]).unwrap(), 1.0);
    }

    // --- precision ---

    #[test]
    fn linear_model_on_its_own_trace_is_fully_precise() {
        let value = precision(&seq_abc(), &one_trace_log(&["a", "b", "c"])).unwrap();
        assert!((value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn flower_precision_is_one_third() {
        let value = precision(&flower_abc(), &one_trace_log(&["a", "b", "c"])).unwrap();
        assert!((value - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn choice_model_covered_by_log_is_fully_precise() {
        let net = tree_to_petri(&T::Choice(vec![T::leaf("a"), T::leaf("b")])).unwrap();
        let log = EventLog::new(vec![
            Trace::new("t1", ["a"]).unwrap(),
            Trace::new("t2", ["b"]).unwrap(),
        ])
        .unwrap();
        let value = precision(&net, &log).unwrap();
        assert!((value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn choice_model_with_unused_branch_loses_precision() {
        let net = tree_to_petri(&T::Choice(vec![T::leaf("a"), T::leaf("b")])).unwrap();
        let value = precision(&net, &one_trace_log(&["a"])).unwrap();
        assert!((value - 0.5).abs() < 1e-12);
    }

    // --- f1 and the combined check ---

    #[test]
    fn f1_guards_zero_over_zero() {
        assert_eq!(f1_score(0.0, 0.0), 0.0);
        assert_eq!(f1_score(1.0, 0.0), 0.0);
        assert!((f1_score(1.0, 1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn flower_against_linear_trace_scores_half() {
        let result = conformance_check(&flower_abc(), &one_trace_log(&["a", "b", "c"])).unwrap();
        assert!((result.fitness - 1.0).abs() < 1e-12);
        assert!((result.precision - 1.0 / 3.0).abs() < 1e-12);
        assert!((result.f1 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn empty_teacher_log_is_rejected() {
        let log = EventLog::new(vec![]).unwrap();
        assert!(matches!(
            conformance_check(&seq_abc(), &log),
            Err(ConformanceError::EmptyTeacherLog)
        ));
    }

    #[test]
    fn disjoint_teacher_scores_zero() {
        let result = conformance_check(&seq_abc(), &one_trace_log(&["d", "e"])).unwrap();
        assert_eq!(result.fitness, 0.0);
        assert_eq!(result.f1, 0.0);
    }
}
