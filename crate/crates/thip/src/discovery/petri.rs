//! Workflow Petri nets: compilation target for process trees and the
//! execution model for replay and alignment.
//!
//! A net has places, transitions (visible or silent), arcs, an initial
//! marking, and a final marking. Trees compile to nets with one token
//! flowing from a source place to a sink place; every operator becomes a
//! small place/transition gadget. Nets serialize to a line-oriented text
//! format (`place`, `trans`, `arc`, `initial`, `final` lines) that parses
//! back to an identical net.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::fmt;

use super::tree::{ModelError, ProcessTree};

/// Index of a place within its net.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PlaceId(pub usize);

/// Index of a transition within its net.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TransitionId(pub usize);

/// A transition; `label` is `None` for silent transitions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub label: Option<String>,
}

impl Transition {
    pub fn is_silent(&self) -> bool {
        self.label.is_none()
    }
}

/// A multiset of tokens over places. Places with zero tokens are not stored,
/// so structural equality is marking equality.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Marking(BTreeMap<PlaceId, u32>);

impl Marking {
    pub fn new() -> Self {
        Self::default()
    }

    /// A marking with a single token.
    pub fn single(place: PlaceId) -> Self {
        let mut m = Self::new();
        m.add(place, 1);
        m
    }

    pub fn tokens(&self, place: PlaceId) -> u32 {
        self.0.get(&place).copied().unwrap_or(0)
    }

    pub fn add(&mut self, place: PlaceId, count: u32) {
        if count == 0 {
            return;
        }
        *self.0.entry(place).or_insert(0) += count;
    }

    fn remove(&mut self, place: PlaceId, count: u32) -> bool {
        match self.0.get_mut(&place) {
            Some(have) if *have >= count => {
                *have -= count;
                if *have == 0 {
                    self.0.remove(&place);
                }
                true
            }
            _ => false,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (PlaceId, u32)> + '_ {
        self.0.iter().map(|(p, c)| (*p, *c))
    }

    pub fn total_tokens(&self) -> u32 {
        self.0.values().sum()
    }
}

/// Errors raised while executing or parsing nets.
#[derive(Debug, thiserror::Error)]
pub enum NetError {
    /// `fire` was called on a transition whose input places lack tokens.
    #[error("TransitionNotEnabled: transition {0} is not enabled in the given marking")]
    TransitionNotEnabled(usize),

    /// A bounded state-space search visited more states than allowed.
    #[error("StateBoundExceeded: search visited more than {0} states")]
    StateBoundExceeded(usize),

    /// A net text document could not be decoded.
    #[error("MalformedNet: line {line}: {message}")]
    MalformedNet { line: usize, message: String },

    /// Underlying I/O failure.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// A Petri net with designated initial and final markings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PetriNet {
    place_count: usize,
    transitions: Vec<Transition>,
    inputs: Vec<Vec<PlaceId>>,
    outputs: Vec<Vec<PlaceId>>,
    initial: Marking,
    final_marking: Marking,
}

/// Default cap on visited states for [`PetriNet::replays`].
pub const REPLAY_STATE_BOUND: usize = 100_000;

impl PetriNet {
    pub fn place_count(&self) -> usize {
        self.place_count
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn transition_ids(&self) -> impl Iterator<Item = TransitionId> {
        (0..self.transitions.len()).map(TransitionId)
    }

    pub fn label(&self, t: TransitionId) -> Option<&str> {
        self.transitions[t.0].label.as_deref()
    }

    pub fn inputs(&self, t: TransitionId) -> &[PlaceId] {
        &self.inputs[t.0]
    }

    pub fn outputs(&self, t: TransitionId) -> &[PlaceId] {
        &self.outputs[t.0]
    }

    pub fn initial_marking(&self) -> &Marking {
        &self.initial
    }

    pub fn final_marking(&self) -> &Marking {
        &self.final_marking
    }

    /// Whether `t` can fire: every input place holds a token.
    pub fn is_enabled(&self, marking: &Marking, t: TransitionId) -> bool {
        let mut needed: BTreeMap<PlaceId, u32> = BTreeMap::new();
        for p in &self.inputs[t.0] {
            *needed.entry(*p).or_insert(0) += 1;
        }
        needed.iter().all(|(p, n)| marking.tokens(*p) >= *n)
    }

    /// All enabled transitions, in id order.
    pub fn enabled_transitions(&self, marking: &Marking) -> Vec<TransitionId> {
        self.transition_ids()
            .filter(|t| self.is_enabled(marking, *t))
            .collect()
    }

    /// Fires `t`, consuming input tokens and producing output tokens.
    pub fn fire(&self, marking: &Marking, t: TransitionId) -> Result<Marking, NetError> {
        let mut next = marking.clone();
        for p in &self.inputs[t.0] {
            if !next.remove(*p, 1) {
                return Err(NetError::TransitionNotEnabled(t.0));
            }
        }
        for p in &self.outputs[t.0] {
            next.add(*p, 1);
        }
        Ok(next)
    }

    /// Whether the net can produce exactly `trace` as its visible behavior,
    /// reaching the final marking.
    ///
    /// Runs a breadth-first search over (marking, position) states, treating
    /// silent transitions as free moves. Errors with
    /// [`NetError::StateBoundExceeded`] past [`REPLAY_STATE_BOUND`] states.
    pub fn replays(&self, trace: &[String]) -> Result<bool, NetError> {
        self.replays_bounded(trace, REPLAY_STATE_BOUND)
    }

    pub fn replays_bounded(&self, trace: &[String], bound: usize) -> Result<bool, NetError> {
        let mut seen: HashSet<(Marking, usize)> = HashSet::new();
        let mut queue = VecDeque::new();
        let start = (self.initial.clone(), 0usize);
        seen.insert(start.clone());
        queue.push_back(start);
        while let Some((marking, pos)) = queue.pop_front() {
            if pos == trace.len() && marking == self.final_marking {
                return Ok(true);
            }
            for t in self.transition_ids() {
                if !self.is_enabled(&marking, t) {
                    continue;
                }
                let next_pos = match self.label(t) {
                    None => pos,
                    Some(label) if pos < trace.len() && label == trace[pos] => pos + 1,
                    Some(_) => continue,
                };
                let next = (self.fire(&marking, t)?, next_pos);
                if seen.insert(next.clone()) {
                    if seen.len() > bound {
                        return Err(NetError::StateBoundExceeded(bound));
                    }
                    queue.push_back(next);
                }
            }
        }
        Ok(false)
    }

    /// Serializes the net to the line-oriented text format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for p in 0..self.place_count {
            out.push_str(&format!("place p{p}\n"));
        }
        for (i, t) in self.transitions.iter().enumerate() {
            match &t.label {
                Some(label) => out.push_str(&format!("trans t{i} \"{}\"\n", escape(label))),
                None => out.push_str(&format!("trans t{i} tau\n")),
            }
        }
        for (i, inputs) in self.inputs.iter().enumerate() {
            for p in inputs {
                out.push_str(&format!("arc p{} -> t{i}\n", p.0));
            }
        }
        for (i, outputs) in self.outputs.iter().enumerate() {
            for p in outputs {
                out.push_str(&format!("arc t{i} -> p{}\n", p.0));
            }
        }
        for (p, count) in self.initial.iter() {
            out.push_str(&format!("initial p{}={count}\n", p.0));
        }
        for (p, count) in self.final_marking.iter() {
            out.push_str(&format!("final p{}={count}\n", p.0));
        }
        out
    }

    /// Parses a net from the text format produced by [`PetriNet::to_text`].
    pub fn from_text(text: &str) -> Result<Self, NetError> {
        parse_net(text)
    }
}

fn escape(label: &str) -> String {
    label.replace('\\', "\\\\").replace('"', "\\\"")
}

fn unescape(text: &str, line: usize) -> Result<String, NetError> {
    let mut out = String::new();
    let mut chars = text.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next() {
                Some(next @ ('\\' | '"')) => out.push(next),
                _ => {
                    return Err(NetError::MalformedNet {
                        line,
                        message: "bad escape in transition label".into(),
                    })
                }
            }
        } else {
            out.push(c);
        }
    }
    Ok(out)
}

/// Incremental builder used by the tree compiler and the parser.
#[derive(Debug, Default)]
pub struct NetBuilder {
    place_count: usize,
    transitions: Vec<Transition>,
    inputs: Vec<Vec<PlaceId>>,
    outputs: Vec<Vec<PlaceId>>,
    initial: Marking,
    final_marking: Marking,
}

impl NetBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_place(&mut self) -> PlaceId {
        let id = PlaceId(self.place_count);
        self.place_count += 1;
        id
    }

    pub fn add_transition(&mut self, label: Option<String>) -> TransitionId {
        let id = TransitionId(self.transitions.len());
        self.transitions.push(Transition { label });
        self.inputs.push(Vec::new());
        self.outputs.push(Vec::new());
        id
    }

    pub fn arc_place_to_transition(&mut self, p: PlaceId, t: TransitionId) {
        self.inputs[t.0].push(p);
    }

    pub fn arc_transition_to_place(&mut self, t: TransitionId, p: PlaceId) {
        self.outputs[t.0].push(p);
    }

    pub fn set_initial(&mut self, marking: Marking) {
        self.initial = marking;
    }

    pub fn set_final(&mut self, marking: Marking) {
        self.final_marking = marking;
    }

    pub fn build(self) -> PetriNet {
        let mut net = PetriNet {
            place_count: self.place_count,
            transitions: self.transitions,
            inputs: self.inputs,
            outputs: self.outputs,
            initial: self.initial,
            final_marking: self.final_marking,
        };
        for list in net.inputs.iter_mut().chain(net.outputs.iter_mut()) {
            list.sort();
        }
        net
    }
}

/// Compiles a process tree into a workflow net with a single source and a
/// single sink place. The tree must pass [`ProcessTree::validate`].
pub fn tree_to_petri(tree: &ProcessTree) -> Result<PetriNet, ModelError> {
    tree.validate()?;
    let mut builder = NetBuilder::new();
    let source = builder.add_place();
    let sink = builder.add_place();
    compile(tree, &mut builder, source, sink);
    builder.set_initial(Marking::single(source));
    builder.set_final(Marking::single(sink));
    Ok(builder.build())
}

/// Wires `tree` between `entry` and `exit` so that consuming one token from
/// `entry` eventually produces exactly one token on `exit`.
fn compile(tree: &ProcessTree, b: &mut NetBuilder, entry: PlaceId, exit: PlaceId) {
    match tree {
        ProcessTree::Leaf(label) => {
            let t = b.add_transition(Some(label.clone()));
            b.arc_place_to_transition(entry, t);
            b.arc_transition_to_place(t, exit);
        }
        ProcessTree::Silent => {
            let t = b.add_transition(None);
            b.arc_place_to_transition(entry, t);
            b.arc_transition_to_place(t, exit);
        }
        ProcessTree::Sequence(cs) => {
            let mut from = entry;
            for c in &cs[..cs.len() - 1] {
                let mid = b.add_place();
                compile(c, b, from, mid);
                from = mid;
            }
            compile(cs.last().expect("validated sequence"), b, from, exit);
        }
        ProcessTree::Choice(cs) => {
            for c in cs {
                compile(c, b, entry, exit);
            }
        }
        ProcessTree::Parallel(cs) => {
            let fork = b.add_transition(None);
            let join = b.add_transition(None);
            b.arc_place_to_transition(entry, fork);
            b.arc_transition_to_place(join, exit);
            for c in cs {
                let branch_in = b.add_place();
                let branch_out = b.add_place();
                b.arc_transition_to_place(fork, branch_in);
                compile(c, b, branch_in, branch_out);
                b.arc_place_to_transition(branch_out, join);
            }
        }
        ProcessTree::Loop(cs) => {
            let body_in = b.add_place();
            let body_out = b.add_place();
            let enter = b.add_transition(None);
            let leave = b.add_transition(None);
            b.arc_place_to_transition(entry, enter);
            b.arc_transition_to_place(enter, body_in);
            b.arc_place_to_transition(body_out, leave);
            b.arc_transition_to_place(leave, exit);
            compile(&cs[0], b, body_in, body_out);
            for redo in &cs[1..] {
                compile(redo, b, body_out, body_in);
            }
        }
    }
}

fn parse_marking_line(
    rest: &str,
    places: usize,
    line: usize,
) -> Result<(PlaceId, u32), NetError> {
    let bad = |message: &str| NetError::MalformedNet {
        line,
        message: message.to_string(),
    };
    let (name, count) = rest
        .split_once('=')
        .ok_or_else(|| bad("expected p<index>=<count>"))?;
    let place = parse_place(name.trim(), places, line)?;
    let count: u32 = count
        .trim()
        .parse()
        .map_err(|_| bad("token count is not a non-negative integer"))?;
    Ok((place, count))
}

fn parse_place(token: &str, places: usize, line: usize) -> Result<PlaceId, NetError> {
    let bad = |message: String| NetError::MalformedNet { line, message };
    let index: usize = token
        .strip_prefix('p')
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| bad(format!("expected a place name like p0, found {token:?}")))?;
    if index >= places {
        return Err(bad(format!("place p{index} was not declared")));
    }
    Ok(PlaceId(index))
}

fn parse_transition(token: &str, transitions: usize, line: usize) -> Result<TransitionId, NetError> {
    let bad = |message: String| NetError::MalformedNet { line, message };
    let index: usize = token
        .strip_prefix('t')
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| bad(format!("expected a transition name like t0, found {token:?}")))?;
    if index >= transitions {
        return Err(bad(format!("transition t{index} was not declared")));
    }
    Ok(TransitionId(index))
}

/// Cuts a trailing `#` comment, ignoring `#` inside quoted labels.
fn strip_comment(raw: &str) -> &str {
    let mut in_quotes = false;
    let mut escaped = false;
    for (i, c) in raw.char_indices() {
        if escaped {
            escaped = false;
            continue;
        }
        match c {
            '\\' if in_quotes => escaped = true,
            '"' => in_quotes = !in_quotes,
            '#' if !in_quotes => return &raw[..i],
            _ => {}
        }
    }
    raw
}

fn parse_net(text: &str) -> Result<PetriNet, NetError> {
    let mut builder = NetBuilder::new();
    let mut initial = Marking::new();
    let mut final_marking = Marking::new();
    let mut place_names: usize = 0;
    let mut transition_count: usize = 0;

    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let bad = |message: String| NetError::MalformedNet { line, message };
        let content = strip_comment(raw).trim();
        if content.is_empty() {
            continue;
        }
        let (keyword, rest) = content
            .split_once(char::is_whitespace)
            .ok_or_else(|| bad(format!("bare keyword {content:?}")))?;
        let rest = rest.trim();
        match keyword {
            "place" => {
                let expected = format!("p{place_names}");
                if rest != expected {
                    return Err(bad(format!(
                        "places must be declared in order; expected {expected}, found {rest:?}"
                    )));
                }
                builder.add_place();
                place_names += 1;
            }
            "trans" => {
                let (name, label) = rest
                    .split_once(char::is_whitespace)
                    .ok_or_else(|| bad("expected trans t<index> <label>".into()))?;
                let expected = format!("t{transition_count}");
                if name != expected {
                    return Err(bad(format!(
                        "transitions must be declared in order; expected {expected}, found {name:?}"
                    )));
                }
                let label = label.trim();
                let label = if label == "tau" {
                    None
                } else if label.len() >= 2 && label.starts_with('"') && label.ends_with('"') {
                    Some(unescape(&label[1..label.len() - 1], line)?)
                } else {
                    return Err(bad(format!(
                        "transition label must be tau or a quoted string, found {label:?}"
                    )));
                };
                builder.add_transition(label);
                transition_count += 1;
            }
            "arc" => {
                let mut parts = rest.split_whitespace();
                let (from, arrow, to) = match (parts.next(), parts.next(), parts.next(), parts.next())
                {
                    (Some(from), Some(arrow), Some(to), None) => (from, arrow, to),
                    _ => return Err(bad("expected arc <from> -> <to>".into())),
                };
                if arrow != "->" {
                    return Err(bad(format!("expected ->, found {arrow:?}")));
                }
                match (from.starts_with('p'), to.starts_with('p')) {
                    (true, false) => {
                        let p = parse_place(from, place_names, line)?;
                        let t = parse_transition(to, transition_count, line)?;
                        builder.arc_place_to_transition(p, t);
                    }
                    (false, true) => {
                        let t = parse_transition(from, transition_count, line)?;
                        let p = parse_place(to, place_names, line)?;
                        builder.arc_transition_to_place(t, p);
                    }
                    _ => {
                        return Err(bad(
                            "arc must connect a place and a transition".into(),
                        ))
                    }
                }
            }
            "initial" => {
                let (p, count) = parse_marking_line(rest, place_names, line)?;
                initial.add(p, count);
            }
            "final" => {
                let (p, count) = parse_marking_line(rest, place_names, line)?;
                final_marking.add(p, count);
            }
            other => return Err(bad(format!("unknown keyword {other:?}"))),
        }
    }
    builder.set_initial(initial);
    builder.set_final(final_marking);
    Ok(builder.build())
}

impl fmt::Display for PetriNet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discovery::tree::ProcessTree as T;

    fn labels(items: &[&str]) -> Vec<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    // --- firing semantics ---

    #[test]
    fn fire_moves_one_token() {
        let net = tree_to_petri(&T::leaf("a")).unwrap();
        let t = TransitionId(0);
        assert!(net.is_enabled(net.initial_marking(), t));
        let next = net.fire(net.initial_marking(), t).unwrap();
        assert_eq!(&next, net.final_marking());
        assert!(net.fire(&next, t).is_err());
    }

    #[test]
    fn enabled_transitions_are_sorted_by_id() {
        let net = tree_to_petri(&T::Choice(vec![T::leaf("a"), T::leaf("b")])).unwrap();
        let enabled = net.enabled_transitions(net.initial_marking());
        assert_eq!(enabled, vec![TransitionId(0), TransitionId(1)]);
    }

    // --- replay over compiled trees ---

    #[test]
    fn sequence_replays_only_its_order() {
        let net = tree_to_petri(&T::Sequence(vec![T::leaf("a"), T::leaf("b"), T::leaf("c")]))
            .unwrap();
        assert!(net.replays(&labels(&["a", "b", "c"])).unwrap());
        assert!(!net.replays(&labels(&["a", "c", "b"])).unwrap());
        assert!(!net.replays(&labels(&["a", "b"])).unwrap());
        assert!(!net.replays(&labels(&[])).unwrap());
    }

    #[test]
    fn parallel_replays_all_interleavings() {
        let net = tree_to_petri(&T::Parallel(vec![T::leaf("a"), T::leaf("b")])).unwrap();
        assert!(net.replays(&labels(&["a", "b"])).unwrap());
        assert!(net.replays(&labels(&["b", "a"])).unwrap());
        assert!(!net.replays(&labels(&["a"])).unwrap());
    }

    #[test]
    fn choice_replays_exactly_one_branch() {
        let net = tree_to_petri(&T::Choice(vec![T::leaf("a"), T::Silent])).unwrap();
        assert!(net.replays(&labels(&["a"])).unwrap());
        assert!(net.replays(&labels(&[])).unwrap());
        assert!(!net.replays(&labels(&["a", "a"])).unwrap());
    }

    #[test]
    fn loop_replays_repeated_bodies() {
        let net = tree_to_petri(&T::Loop(vec![T::leaf("a"), T::Silent])).unwrap();
        assert!(net.replays(&labels(&["a"])).unwrap());
        assert!(net.replays(&labels(&["a", "a", "a"])).unwrap());
        assert!(!net.replays(&labels(&[])).unwrap());
    }

    #[test]
    fn loop_inside_choice_does_not_leak_tokens() {
        let tree = T::Choice(vec![
            T::Loop(vec![T::leaf("a"), T::Silent]),
            T::leaf("b"),
        ]);
        let net = tree_to_petri(&tree).unwrap();
        assert!(net.replays(&labels(&["b"])).unwrap());
        assert!(net.replays(&labels(&["a", "a"])).unwrap());
        assert!(!net.replays(&labels(&["a", "b"])).unwrap());
        assert!(!net.replays(&labels(&["b", "a"])).unwrap());
    }

    #[test]
    fn compiled_tree_language_matches_tree_language() {
        let tree = T::Sequence(vec![
            T::leaf("a"),
            T::Parallel(vec![T::leaf("b"), T::Choice(vec![T::leaf("c"), T::Silent])]),
        ]);
        let net = tree_to_petri(&tree).unwrap();
        let lang = tree.language(4);
        for word in &lang {
            assert!(net.replays(word).unwrap(), "net rejects {word:?}");
        }
        assert!(!net.replays(&labels(&["b", "a"])).unwrap());
    }

    #[test]
    fn compiled_net_has_source_and_sink() {
        let tree = T::Loop(vec![
            T::Sequence(vec![T::leaf("a"), T::leaf("b")]),
            T::leaf("r"),
        ]);
        let net = tree_to_petri(&tree).unwrap();
        assert_eq!(net.initial_marking().total_tokens(), 1);
        assert_eq!(net.final_marking().total_tokens(), 1);
        let source = net.initial_marking().iter().next().unwrap().0;
        let sink = net.final_marking().iter().next().unwrap().0;
        for t in net.transition_ids() {
            assert!(!net.outputs(t).contains(&source), "source has an input arc");
            assert!(!net.inputs(t).contains(&sink), "sink has an output arc");
        }
    }

    #[test]
    fn replay_bound_is_enforced() {
        let tree = T::Parallel(vec![
            T::Loop(vec![T::leaf("a"), T::Silent]),
            T::Loop(vec![T::leaf("b"), T::Silent]),
            T::Loop(vec![T::leaf("c"), T::Silent]),
        ]);
        let net = tree_to_petri(&tree).unwrap();
        let long: Vec<String> = std::iter::repeat(["a", "b", "c"])
            .take(40)
            .flatten()
            .map(String::from)
            .collect();
        match net.replays_bounded(&long, 50) {
            Err(NetError::StateBoundExceeded(50)) => {}
            other => panic!("expected StateBoundExceeded, got {other:?}"),
        }
    }

    // --- text format ---

    #[test]
    fn text_format_round_trips() {
        let tree = T::Sequence(vec![
            T::leaf("plan"),
            T::Loop(vec![T::leaf("compute"), T::leaf("re check")]),
            T::Choice(vec![T::leaf("verify"), T::Silent]),
        ]);
        let net = tree_to_petri(&tree).unwrap();
        let text = net.to_text();
        let back = PetriNet::from_text(&text).unwrap();
        assert_eq!(back, net);
    }

    #[test]
    fn text_format_escapes_quotes() {
        let net = tree_to_petri(&T::leaf("say \"hi\"")).unwrap();
        let back = PetriNet::from_text(&net.to_text()).unwrap();
        assert_eq!(back, net);
    }

    #[test]
    fn parse_reports_line_numbers() {
        let text = "place p0\nplace p1\narc p0 -> q7\n";
        match PetriNet::from_text(text) {
            Err(NetError::MalformedNet { line: 3, .. }) => {}
            other => panic!("expected MalformedNet at line 3, got {other:?}"),
        }
    }

    #[test]
    fn parse_rejects_undeclared_endpoints() {
        let text = "place p0\ntrans t0 \"a\"\narc p1 -> t0\n";
        assert!(matches!(
            PetriNet::from_text(text),
            Err(NetError::MalformedNet { line: 3, .. })
        ));
    }

    #[test]
    fn parse_ignores_comments_and_blank_lines() {
        let text = "# tiny net\nplace p0\nplace p1\n\ntrans t0 \"a\" # visible\narc p0 -> t0\narc t0 -> p1\ninitial p0=1\nfinal p1=1\n";
        let net = PetriNet::from_text(text).unwrap();
        assert!(net.replays(&labels(&["a"])).unwrap());
    }
}
