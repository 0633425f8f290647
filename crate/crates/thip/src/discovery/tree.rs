//! Process trees: block-structured process models.
//!
//! A process tree composes activity leaves with four operators. `Sequence`
//! runs its children left to right, `Choice` runs exactly one, `Parallel`
//! interleaves all of them, and `Loop` runs its first child (the body), then
//! zero or more rounds of one redo child followed by the body again.
//! `Silent` is the unobservable leaf. Trees render in a compact prefix
//! notation: `->(a,+(b,c))` is `a` followed by `b` and `c` in parallel.

use std::collections::BTreeSet;
use std::fmt;

use rand::Rng;

use thiserror::Error;

/// Errors raised while building or compiling process models.
#[derive(Debug, Error)]
pub enum ModelError {
    /// An operator node has too few children for its semantics.
    #[error("MalformedTree: {0}")]
    MalformedTree(String),

    /// A leaf label was empty or whitespace-only.
    #[error("MalformedTree: leaf label {0:?} is empty or whitespace-only")]
    EmptyLeafLabel(String),
}

/// A block-structured process model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProcessTree {
    /// A visible activity.
    Leaf(String),
    /// An unobservable step.
    Silent,
    /// All children, in order.
    Sequence(Vec<ProcessTree>),
    /// Exactly one child.
    Choice(Vec<ProcessTree>),
    /// All children, interleaved.
    Parallel(Vec<ProcessTree>),
    /// First child is the body; the rest are redo parts. Executes
    /// `body (redo body)*`.
    Loop(Vec<ProcessTree>),
}

impl ProcessTree {
    /// Builds a leaf, validating the label.
    pub fn leaf(label: impl Into<String>) -> Self {
        Self::Leaf(label.into())
    }

    /// Checks structural invariants: operator arities and leaf labels.
    pub fn validate(&self) -> Result<(), ModelError> {
        match self {
            Self::Leaf(label) => {
                if label.trim().is_empty() {
                    return Err(ModelError::EmptyLeafLabel(label.clone()));
                }
            }
            Self::Silent => {}
            Self::Sequence(children) | Self::Choice(children) | Self::Parallel(children) => {
                if children.is_empty() {
                    return Err(ModelError::MalformedTree(format!(
                        "{} node has no children",
                        self.operator_name()
                    )));
                }
                for child in children {
                    child.validate()?;
                }
            }
            Self::Loop(children) => {
                if children.len() < 2 {
                    return Err(ModelError::MalformedTree(
                        "loop node needs a body and at least one redo child".into(),
                    ));
                }
                for child in children {
                    child.validate()?;
                }
            }
        }
        Ok(())
    }

    fn operator_name(&self) -> &'static str {
        match self {
            Self::Leaf(_) => "leaf",
            Self::Silent => "tau",
            Self::Sequence(_) => "sequence",
            Self::Choice(_) => "choice",
            Self::Parallel(_) => "parallel",
            Self::Loop(_) => "loop",
        }
    }

    /// The set of visible activity labels in the tree.
    pub fn alphabet(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_alphabet(&mut out);
        out
    }

    fn collect_alphabet(&self, out: &mut BTreeSet<String>) {
        match self {
            Self::Leaf(label) => {
                out.insert(label.clone());
            }
            Self::Silent => {}
            Self::Sequence(cs) | Self::Choice(cs) | Self::Parallel(cs) | Self::Loop(cs) => {
                for c in cs {
                    c.collect_alphabet(out);
                }
            }
        }
    }

    /// Number of visible leaves, counting duplicates.
    pub fn leaf_count(&self) -> usize {
        match self {
            Self::Leaf(_) => 1,
            Self::Silent => 0,
            Self::Sequence(cs) | Self::Choice(cs) | Self::Parallel(cs) | Self::Loop(cs) => {
                cs.iter().map(Self::leaf_count).sum()
            }
        }
    }

    /// All visible traces of length at most `max_len` the tree can produce.
    ///
    /// Loops are unrolled until no new trace under the length bound appears,
    /// so the result is exactly the tree's language cut at `max_len`.
    pub fn language(&self, max_len: usize) -> BTreeSet<Vec<String>> {
        match self {
            Self::Leaf(label) => {
                let mut out = BTreeSet::new();
                if max_len >= 1 {
                    out.insert(vec![label.clone()]);
                }
                out
            }
            Self::Silent => BTreeSet::from([Vec::new()]),
            Self::Sequence(cs) => {
                let mut acc = BTreeSet::from([Vec::new()]);
                for c in cs {
                    let child = c.language(max_len);
                    let mut next = BTreeSet::new();
                    for prefix in &acc {
                        for suffix in &child {
                            if prefix.len() + suffix.len() <= max_len {
                                let mut joined = prefix.clone();
                                joined.extend(suffix.iter().cloned());
                                next.insert(joined);
                            }
                        }
                    }
                    acc = next;
                }
                acc
            }
            Self::Choice(cs) => cs
                .iter()
                .flat_map(|c| c.language(max_len))
                .collect(),
            Self::Parallel(cs) => {
                let mut acc = BTreeSet::from([Vec::new()]);
                for c in cs {
                    let child = c.language(max_len);
                    let mut next = BTreeSet::new();
                    for left in &acc {
                        for right in &child {
                            if left.len() + right.len() <= max_len {
                                for merged in interleavings(left, right) {
                                    next.insert(merged);
                                }
                            }
                        }
                    }
                    acc = next;
                }
                acc
            }
            Self::Loop(cs) => {
                let body = cs[0].language(max_len);
                let redo: BTreeSet<Vec<String>> = cs[1..]
                    .iter()
                    .flat_map(|c| c.language(max_len))
                    .collect();
                let mut acc = body.clone();
                loop {
                    let mut grew = false;
                    let snapshot: Vec<Vec<String>> = acc.iter().cloned().collect();
                    for prefix in &snapshot {
                        for r in &redo {
                            for b in &body {
                                if prefix.len() + r.len() + b.len() <= max_len {
                                    let mut joined = prefix.clone();
                                    joined.extend(r.iter().cloned());
                                    joined.extend(b.iter().cloned());
                                    grew |= acc.insert(joined);
                                }
                            }
                        }
                    }
                    if !grew {
                        break;
                    }
                }
                acc
            }
        }
    }

    /// Samples one visible trace, drawing choices from `rng`.
    ///
    /// Loop continuation fires with probability 0.35 per round, capped at
    /// `max_rounds` extra rounds so nested loops always terminate.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<String> {
        let mut out = Vec::new();
        self.sample_into(rng, &mut out, 3);
        out
    }

    fn sample_into<R: Rng>(&self, rng: &mut R, out: &mut Vec<String>, max_rounds: usize) {
        match self {
            Self::Leaf(label) => out.push(label.clone()),
            Self::Silent => {}
            Self::Sequence(cs) => {
                for c in cs {
                    c.sample_into(rng, out, max_rounds);
                }
            }
            Self::Choice(cs) => {
                let pick = rng.gen_range(0..cs.len());
                cs[pick].sample_into(rng, out, max_rounds);
            }
            Self::Parallel(cs) => {
                let mut branches: Vec<Vec<String>> = cs
                    .iter()
                    .map(|c| {
                        let mut branch = Vec::new();
                        c.sample_into(rng, &mut branch, max_rounds);
                        branch
                    })
                    .collect();
                let mut cursors = vec![0usize; branches.len()];
                loop {
                    let open: Vec<usize> = branches
                        .iter()
                        .enumerate()
                        .filter(|(i, b)| cursors[*i] < b.len())
                        .map(|(i, _)| i)
                        .collect();
                    if open.is_empty() {
                        break;
                    }
                    let pick = open[rng.gen_range(0..open.len())];
                    out.push(std::mem::take(&mut branches[pick][cursors[pick]]));
                    cursors[pick] += 1;
                }
            }
            Self::Loop(cs) => {
                cs[0].sample_into(rng, out, max_rounds);
                let mut rounds = 0;
                while rounds < max_rounds && rng.gen::<f64>() < 0.35 {
                    let redo = rng.gen_range(1..cs.len());
                    cs[redo].sample_into(rng, out, max_rounds);
                    cs[0].sample_into(rng, out, max_rounds);
                    rounds += 1;
                }
            }
        }
    }
}

/// All order-preserving merges of two sequences.
fn interleavings(left: &[String], right: &[String]) -> Vec<Vec<String>> {
    if left.is_empty() {
        return vec![right.to_vec()];
    }
    if right.is_empty() {
        return vec![left.to_vec()];
    }
    let mut out = Vec::new();
    for mut merged in interleavings(&left[1..], right) {
        merged.insert(0, left[0].clone());
        out.push(merged);
    }
    for mut merged in interleavings(left, &right[1..]) {
        merged.insert(0, right[0].clone());
        out.push(merged);
    }
    out
}

fn write_label(f: &mut fmt::Formatter<'_>, label: &str) -> fmt::Result {
    let needs_quotes = label == "tau"
        || label
            .chars()
            .any(|c| c.is_whitespace() || matches!(c, '(' | ')' | ',' | '\'' | '"'));
    if needs_quotes {
        write!(f, "'{}'", label.replace('\\', "\\\\").replace('\'', "\\'"))
    } else {
        write!(f, "{label}")
    }
}

impl fmt::Display for ProcessTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Leaf(label) => write_label(f, label),
            Self::Silent => write!(f, "tau"),
            Self::Sequence(cs) | Self::Choice(cs) | Self::Parallel(cs) | Self::Loop(cs) => {
                let symbol = match self {
                    Self::Sequence(_) => "->",
                    Self::Choice(_) => "X",
                    Self::Parallel(_) => "+",
                    _ => "*",
                };
                write!(f, "{symbol}(")?;
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{c}")?;
                }
                write!(f, ")")
            }
        }
    }
}
