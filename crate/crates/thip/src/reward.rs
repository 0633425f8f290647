//! Reward functions over rollout text.
//!
//! A rollout earns three additive components. The format term checks the
//! response shape: exactly one `<think>…</think>` pair followed by a
//! non-empty `\boxed{…}` answer. The answer term compares the boxed content
//! against the ground truth after normalization, treating numerically equal
//! forms such as `0.5` and `1/2` as the same. The conformance term mines a
//! process model from the rollout's reasoning trace and scores it against
//! the teacher demonstration with alignment-based conformance checking. The
//! total is always the plain sum of the three raw components; weighting, if
//! any, is the trainer's concern.

use num::BigRational;

use crate::conformance::{conformance_check, ConformanceResult};
use crate::discovery::discover_net;
use crate::eventlog::{EventLog, Trace};
use crate::extract::{extract_trace, think_region, ExtractionRules};

/// A task instance: the prompt shown to the policy and its reference answer.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Query {
    pub id: String,
    pub prompt: String,
    pub ground_truth: String,
}

/// A rollout split into its structural regions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RolloutText {
    pub full_text: String,
    /// Content of the first `<think>…</think>` pair, if present.
    pub think_region: Option<String>,
    /// Content of the first well-formed `\boxed{…}` after the think pair
    /// (or anywhere, when no pair exists).
    pub answer_region: Option<String>,
}

impl RolloutText {
    /// Splits `text` into think and answer regions.
    pub fn parse(text: impl Into<String>) -> Self {
        let full_text = text.into();
        let think = think_region(&full_text).map(str::to_string);
        let search_from = match think_close_end(&full_text) {
            Some(end) => end,
            None => 0,
        };
        let answer_region = boxed_content(&full_text[search_from..]).map(str::to_string);
        Self {
            full_text,
            think_region: think,
            answer_region,
        }
    }
}

/// Byte offset just past the `</think>` that closes the first think pair.
fn think_close_end(text: &str) -> Option<usize> {
    let open = text.find("<think>")?;
    let body_start = open + "<think>".len();
    let close = text[body_start..].find("</think>")?;
    Some(body_start + close + "</think>".len())
}

/// Content of the first `\boxed{…}` with balanced braces.
fn boxed_content(text: &str) -> Option<&str> {
    let start = text.find("\\boxed{")? + "\\boxed{".len();
    let mut depth = 1u32;
    for (offset, c) in text[start..].char_indices() {
        match c {
            '{' => depth += 1,
            '}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(&text[start..start + offset]);
                }
            }
            _ => {}
        }
    }
    None
}

/// 1 when the text has exactly one `<think>…</think>` pair followed by a
/// non-empty boxed answer, else 0.
pub fn format_reward(text: &str) -> f64 {
    let opens = text.matches("<think>").count();
    let closes = text.matches("</think>").count();
    if opens != 1 || closes != 1 {
        return 0.0;
    }
    let Some(close_end) = think_close_end(text) else {
        return 0.0;
    };
    match boxed_content(&text[close_end..]) {
        Some(answer) if !answer.trim().is_empty() => 1.0,
        _ => 0.0,
    }
}

/// Strips one matched pair of outer braces, repeatedly.
fn strip_outer_braces(mut s: &str) -> &str {
    loop {
        s = s.trim();
        let stripped = s.strip_prefix('{').and_then(|rest| {
            let inner = rest.strip_suffix('}')?;
            let mut depth = 0i64;
            for c in inner.chars() {
                match c {
                    '{' => depth += 1,
                    '}' => {
                        depth -= 1;
                        if depth < 0 {
                            return None;
                        }
                    }
                    _ => {}
                }
            }
            (depth == 0).then_some(inner)
        });
        match stripped {
            Some(inner) => s = inner,
            None => return s,
        }
    }
}

/// Parses integers, decimals, and `p/q` fractions into exact rationals.
fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    let (sign, digits) = match s.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, s.strip_prefix('+').unwrap_or(s)),
    };
    let digits = digits.trim();
    if digits.is_empty() {
        return None;
    }
    let make = |n: num::BigInt, d: num::BigInt| Some(BigRational::new(n * sign, d));
    if let Some((numerator, denominator)) = digits.split_once('/') {
        let n: num::BigInt = numerator.trim().parse().ok()?;
        let d: num::BigInt = denominator.trim().parse().ok()?;
        if d == num::BigInt::from(0) {
            return None;
        }
        return make(n, d);
    }
    if let Some((integer, fraction)) = digits.split_once('.') {
        if !integer.chars().all(|c| c.is_ascii_digit())
            || !fraction.chars().all(|c| c.is_ascii_digit())
            || (integer.is_empty() && fraction.is_empty())
        {
            return None;
        }
        let scale = num::BigInt::from(10u32).pow(fraction.len() as u32);
        let integer: num::BigInt = if integer.is_empty() {
            0.into()
        } else {
            integer.parse().ok()?
        };
        let fraction: num::BigInt = if fraction.is_empty() {
            0.into()
        } else {
            fraction.parse().ok()?
        };
        return make(integer * &scale + fraction, scale);
    }
    if !digits.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    make(digits.parse().ok()?, 1.into())
}

/// Normalizes an answer: trims whitespace and strips redundant outer braces.
fn normalize_answer(s: &str) -> &str {
    strip_outer_braces(s.trim())
}

/// 1 when the predicted answer equals the ground truth after normalization,
/// else 0. Both are compared as exact rationals when they parse as numbers,
/// so `0.5` matches `1/2`; otherwise as strings.
pub fn answer_reward(predicted: &str, ground_truth: &str) -> f64 {
    let predicted = normalize_answer(predicted);
    let ground_truth = normalize_answer(ground_truth);
    let equal = match (parse_rational(predicted), parse_rational(ground_truth)) {
        (Some(p), Some(g)) => p == g,
        _ => predicted == ground_truth,
    };
    if equal {
        1.0
    } else {
        0.0
    }
}

/// The conformance component: the harmonic mean from a conformance check.
pub fn conformance_reward(result: &ConformanceResult) -> f64 {
    result.f1
}

/// The three reward components and their sum.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct RewardBreakdown {
    pub format: f64,
    pub answer: f64,
    pub conformance: f64,
    /// Always `format + answer + conformance`, summed in that order.
    pub total: f64,
}

impl RewardBreakdown {
    pub fn new(format: f64, answer: f64, conformance: f64) -> Self {
        Self {
            format,
            answer,
            conformance,
            total: format + answer + conformance,
        }
    }
}

/// Scores one rollout against a query and a teacher demonstration log.
///
/// The conformance component mines a model from the rollout's think region
/// (extracted with `rules`) and checks it against the teacher log. A rollout
/// without a think region scores 0 on conformance, as does any pipeline
/// failure on the way (logged as a warning); scoring itself never fails.
pub fn total_reward(
    query: &Query,
    rollout: &RolloutText,
    teacher: &EventLog,
    rules: &ExtractionRules,
) -> RewardBreakdown {
    let format = format_reward(&rollout.full_text);
    let answer = rollout
        .answer_region
        .as_deref()
        .map(|predicted| answer_reward(predicted, &query.ground_truth))
        .unwrap_or(0.0);
    let conformance = match &rollout.think_region {
        None => 0.0,
        Some(region) => {
            let trace = extract_trace(region, rules, format!("{}::rollout", query.id));
            conformance_from_trace(&trace, teacher).unwrap_or_else(|message| {
                log::warn!("conformance scoring failed for query {}: {message}", query.id);
                0.0
            })
        }
    };
    RewardBreakdown::new(format, answer, conformance)
}

fn conformance_from_trace(trace: &Trace, teacher: &EventLog) -> Result<f64, String> {
    let rollout_log = EventLog::from_trace(trace.clone());
    let net = discover_net(&rollout_log).map_err(|e| e.to_string())?;
    let result = conformance_check(&net, teacher).map_err(|e| e.to_string())?;
    Ok(conformance_reward(&result))
}
