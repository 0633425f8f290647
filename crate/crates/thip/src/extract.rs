//! Turning free-form reasoning text into event-log traces.
//!
//! [`extract_trace`] works on the region inside the first
//! `<think>…</think>` pair (or the whole text when no pair exists). It
//! splits the region into steps at configurable delimiters, then labels each
//! step with the first matching rule from an ordered pattern list, falling
//! back to a default label. The result is a [`Trace`] carrying the original
//! text. [`extract_trace_remote`] delegates labeling to an HTTP service
//! instead, retrying on transport failures.

use std::time::Duration;

use regex::Regex;
use serde::Deserialize;
use thiserror::Error;

use crate::eventlog::Trace;

/// Errors raised while building rules or calling a remote labeler.
#[derive(Debug, Error)]
pub enum ExtractError {
    /// A delimiter or label pattern failed to compile.
    #[error("BadPattern: {pattern:?}: {message}")]
    BadPattern { pattern: String, message: String },

    /// A rule set field was out of range.
    #[error("BadRules: {0}")]
    BadRules(String),

    /// The labeling service stayed unreachable after all retries.
    #[error("LabelerUnavailable: no usable response after {attempts} attempts: {last_error}")]
    LabelerUnavailable { attempts: u32, last_error: String },

    /// The labeling service answered with a body this crate cannot use.
    #[error("LabelerBadResponse: {0}")]
    LabelerBadResponse(String),
}

/// Ordered segmentation and labeling rules.
#[derive(Debug, Clone)]
pub struct ExtractionRules {
    delimiters: Vec<Regex>,
    label_rules: Vec<(Regex, String)>,
    default_label: String,
    max_steps: usize,
}

fn compile(pattern: &str) -> Result<Regex, ExtractError> {
    Regex::new(pattern).map_err(|e| ExtractError::BadPattern {
        pattern: pattern.to_string(),
        message: e.to_string(),
    })
}

impl ExtractionRules {
    /// Builds rules from delimiter patterns and ordered `(pattern, label)`
    /// pairs. Labels must be non-blank and `max_steps` positive.
    pub fn new(
        delimiters: &[String],
        label_rules: &[(String, String)],
        default_label: impl Into<String>,
        max_steps: usize,
    ) -> Result<Self, ExtractError> {
        if max_steps == 0 {
            return Err(ExtractError::BadRules("max_steps must be positive".into()));
        }
        let default_label = default_label.into();
        if default_label.trim().is_empty() {
            return Err(ExtractError::BadRules(
                "default label must not be blank".into(),
            ));
        }
        let delimiters = delimiters
            .iter()
            .map(|p| compile(p))
            .collect::<Result<Vec<_>, _>>()?;
        let label_rules = label_rules
            .iter()
            .map(|(pattern, label)| {
                if label.trim().is_empty() {
                    return Err(ExtractError::BadRules(format!(
                        "label for pattern {pattern:?} must not be blank"
                    )));
                }
                Ok((compile(pattern)?, label.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            delimiters,
            label_rules,
            default_label,
            max_steps,
        })
    }

    pub fn max_steps(&self) -> usize {
        self.max_steps
    }

    pub fn default_label(&self) -> &str {
        &self.default_label
    }

    /// Splits a region into non-empty trimmed steps.
    fn segment<'a>(&self, region: &'a str) -> Vec<&'a str> {
        let mut segments = vec![region];
        for delimiter in &self.delimiters {
            segments = segments
                .into_iter()
                .flat_map(|s| delimiter.split(s))
                .collect();
        }
        segments
            .into_iter()
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .collect()
    }

    /// Labels one step with the first matching rule, or the default label.
    fn label(&self, step: &str) -> &str {
        self.label_rules
            .iter()
            .find(|(pattern, _)| pattern.is_match(step))
            .map(|(_, label)| label.as_str())
            .unwrap_or(&self.default_label)
    }
}

/// Default delimiter patterns: blank lines, step markers, sentence ends.
pub(crate) fn default_delimiters() -> Vec<String> {
    [
        r"\n\s*\n",
        r"(?m)^\s*(?:Step\s+\d+[:.)]|\d+[.)]\s|[-*]\s)",
        r"[.!?]\s+",
    ]
    .map(String::from)
    .to_vec()
}

/// Default labeling taxonomy for reasoning moves.
pub(crate) fn default_label_rules() -> Vec<(String, String)> {
    [
        (r"(?i)\b(plan|approach|strategy|first,? I|let'?s break)\b", "plan"),
        (r"(?i)\b(recall|know that|by definition|the formula)\b", "recall"),
        (r"(?i)\b(assume|suppose|let \w+ (?:be|=))\b", "assume"),
        (
            r"(?i)(\d+\s*[-+*/^=]\s*\d+|\b(compute|calculate|multiply|divide|add|subtract|solve|simplif)\w*\b)",
            "compute",
        ),
        (r"(?i)\b(check|verify|confirm|double.?check|sanity)\b", "verify"),
        (r"(?i)\b(wait|actually|hmm|mistake|wrong|instead|re.?consider)\b", "backtrack"),
        (r"(?i)\b(so|thus|therefore|hence|in total|final|answer is)\b", "conclude"),
    ]
    .map(|(p, l)| (p.to_string(), l.to_string()))
    .to_vec()
}

pub(crate) const DEFAULT_STEP_LABEL: &str = "state";
pub(crate) const DEFAULT_MAX_STEPS: usize = 64;

impl Default for ExtractionRules {
    /// Sentence and step-marker segmentation with a small taxonomy of
    /// reasoning moves.
    fn default() -> Self {
        Self::new(
            &default_delimiters(),
            &default_label_rules(),
            DEFAULT_STEP_LABEL,
            DEFAULT_MAX_STEPS,
        )
        .expect("default rules compile")
    }
}

/// The region inside the first `<think>…</think>` pair, if present.
pub fn think_region(text: &str) -> Option<&str> {
    let open = text.find("<think>")?;
    let body_start = open + "<think>".len();
    let close = text[body_start..].find("</think>")?;
    Some(&text[body_start..body_start + close])
}

/// Extracts an activity trace from reasoning text.
///
/// Works on the first `<think>…</think>` region, or the whole text when the
/// pair is absent. Produces at most `max_steps` activities; text with no
/// recognizable step yields a single default-labeled activity, so every
/// extraction supports discovery.
pub fn extract_trace(text: &str, rules: &ExtractionRules, case_id: impl Into<String>) -> Trace {
    let region = think_region(text).unwrap_or(text);
    let labels: Vec<String> = rules
        .segment(region)
        .into_iter()
        .take(rules.max_steps)
        .map(|step| rules.label(step).to_string())
        .collect();
    let labels = if labels.is_empty() {
        vec![rules.default_label.clone()]
    } else {
        labels
    };
    Trace::new(case_id, labels)
        .expect("rule labels are validated non-blank")
        .with_raw_text(text)
}

/// Connection settings for a remote labeling service.
#[derive(Debug, Clone)]
pub struct RemoteLabelerConfig {
    /// Full URL of the labeling endpoint.
    pub endpoint: String,
    pub timeout: Duration,
    /// Extra attempts after the first on transport failures.
    pub max_retries: u32,
    /// Optional bearer token added as an `authorization` header.
    pub auth_token: Option<String>,
}

impl RemoteLabelerConfig {
    pub fn new(endpoint: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            timeout: Duration::from_secs(10),
            max_retries: 3,
            auth_token: None,
        }
    }
}

#[derive(Deserialize)]
struct LabelerResponse {
    labels: Vec<String>,
}

/// Extracts a trace by sending the text to a remote labeling service.
///
/// Posts `{"text": ...}` and expects `{"labels": [...]}` back. Transport
/// failures and non-200 statuses retry with short exponential backoff up to
/// `max_retries` extra attempts; a malformed body or unusable labels fail
/// immediately with [`ExtractError::LabelerBadResponse`].
pub fn extract_trace_remote(
    text: &str,
    config: &RemoteLabelerConfig,
    case_id: impl Into<String>,
) -> Result<Trace, ExtractError> {
    let agent = ureq::AgentBuilder::new()
        .timeout(config.timeout)
        .build();
    let attempts = config.max_retries + 1;
    let mut last_error = String::new();
    for attempt in 0..attempts {
        if attempt > 0 {
            let backoff = Duration::from_millis(50u64 << (attempt - 1).min(5));
            std::thread::sleep(backoff);
        }
        let mut request = agent
            .post(&config.endpoint)
            .set("content-type", "application/json");
        if let Some(token) = &config.auth_token {
            request = request.set("authorization", &format!("Bearer {token}"));
        }
        let response = match request.send_json(serde_json::json!({ "text": text })) {
            Ok(response) => response,
            Err(err) => {
                last_error = err.to_string();
                continue;
            }
        };
        if response.status() != 200 {
            last_error = format!("unexpected status {}", response.status());
            continue;
        }
        let body: LabelerResponse = response
            .into_json()
            .map_err(|e| ExtractError::LabelerBadResponse(e.to_string()))?;
        if body.labels.is_empty() {
            return Err(ExtractError::LabelerBadResponse(
                "response contained no labels".into(),
            ));
        }
        let trace = Trace::new(case_id, body.labels)
            .map_err(|e| ExtractError::LabelerBadResponse(e.to_string()))?;
        return Ok(trace.with_raw_text(text));
    }
    Err(ExtractError::LabelerUnavailable {
        attempts,
        last_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::{BufRead, BufReader, Write};
    use std::net::TcpListener;
    use std::sync::atomic::{AtomicU32, Ordering};
    use std::sync::Arc;

    // --- segmentation and labeling ---

    #[test]
    fn splits_on_sentences_and_labels_steps() {
        let rules = ExtractionRules::default();
        let text = "First, I will plan the approach. Compute 3 * 4. Check the result.";
        let trace = extract_trace(text, &rules, "case_1");
        assert_eq!(trace.activities(), ["plan", "compute", "verify"]);
        assert_eq!(trace.raw_text(), Some(text));
    }

    #[test]
    fn uses_think_region_when_present() {
        let rules = ExtractionRules::default();
        let text = "<think>Compute 1+1. Verify the sum.</think> \\boxed{2}";
        let trace = extract_trace(text, &rules, "case_1");
        assert_eq!(trace.activities(), ["compute", "verify"]);
    }

    #[test]
    fn whole_text_used_when_no_think_pair() {
        let rules = ExtractionRules::default();
        let trace = extract_trace("Compute 5-3.", &rules, "case_1");
        assert_eq!(trace.activities(), ["compute"]);
    }

    #[test]
    fn unmatched_steps_get_default_label() {
        let rules = ExtractionRules::default();
        let trace = extract_trace("The sky is blue today.", &rules, "case_1");
        assert_eq!(trace.activities(), ["state"]);
    }

    #[test]
    fn empty_region_yields_single_default_activity() {
        let rules = ExtractionRules::default();
        let trace = extract_trace("<think>   </think>\\boxed{1}", &rules, "case_1");
        assert_eq!(trace.activities(), [rules.default_label()]);
    }

    #[test]
    fn first_matching_rule_wins() {
        let rules = ExtractionRules::new(
            &[r"\.".to_string()],
            &[
                (r"alpha".to_string(), "first".to_string()),
                (r"alpha beta".to_string(), "second".to_string()),
            ],
            "other",
            16,
        )
        .unwrap();
        let trace = extract_trace("alpha beta.", &rules, "case_1");
        assert_eq!(trace.activities(), ["first"]);
    }

    #[test]
    fn max_steps_caps_the_trace() {
        let rules = ExtractionRules::new(&[r"\s+".to_string()], &[], "step", 3).unwrap();
        let trace = extract_trace("one two three four five", &rules, "case_1");
        assert_eq!(trace.len(), 3);
    }

    #[test]
    fn numbered_step_markers_split_segments() {
        let rules = ExtractionRules::default();
        let text = "<think>\nStep 1: plan the attack\nStep 2: compute 2+2\n</think>\\boxed{4}";
        let trace = extract_trace(text, &rules, "case_1");
        assert_eq!(trace.activities(), ["plan", "compute"]);
    }

    // --- rule validation ---

    #[test]
    fn bad_pattern_is_rejected() {
        let err = ExtractionRules::new(&["(".to_string()], &[], "x", 4).unwrap_err();
        assert!(matches!(err, ExtractError::BadPattern { .. }));
    }

    #[test]
    fn zero_max_steps_is_rejected() {
        let err = ExtractionRules::new(&[], &[], "x", 0).unwrap_err();
        assert!(matches!(err, ExtractError::BadRules(_)));
    }

    #[test]
    fn blank_labels_are_rejected() {
        let err = ExtractionRules::new(&[], &[], "  ", 4).unwrap_err();
        assert!(matches!(err, ExtractError::BadRules(_)));
        let err =
            ExtractionRules::new(&[], &[("a".to_string(), " ".to_string())], "x", 4).unwrap_err();
        assert!(matches!(err, ExtractError::BadRules(_)));
    }

    // --- remote labeler against a local stub ---

    /// Serves canned HTTP responses; `fail_first` requests get a 500.
    fn stub_labeler(responses: Vec<String>, fail_first: u32) -> (String, Arc<AtomicU32>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let hits = Arc::new(AtomicU32::new(0));
        let seen = hits.clone();
        std::thread::spawn(move || {
            for (i, stream) in listener.incoming().enumerate() {
                let Ok(mut stream) = stream else { break };
                seen.fetch_add(1, Ordering::SeqCst);
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut content_length = 0usize;
                loop {
                    let mut line = String::new();
                    if reader.read_line(&mut line).is_err() || line == "\r\n" || line.is_empty() {
                        break;
                    }
                    if let Some(value) = line.to_ascii_lowercase().strip_prefix("content-length:")
                    {
                        content_length = value.trim().parse().unwrap_or(0);
                    }
                }
                let mut body = vec![0u8; content_length];
                std::io::Read::read_exact(&mut reader, &mut body).ok();
                let reply = if (i as u32) < fail_first {
                    "HTTP/1.1 500 Internal Server Error\r\ncontent-length: 0\r\n\r\n".to_string()
                } else {
                    let payload = responses
                        .get((i as usize).saturating_sub(fail_first as usize))
                        .cloned()
                        .unwrap_or_else(|| "{\"labels\":[\"x\"]}".to_string());
                    format!(
                        "HTTP/1.1 200 OK\r\ncontent-type: application/json\r\ncontent-length: {}\r\n\r\n{}",
                        payload.len(),
                        payload
                    )
                };
                stream.write_all(reply.as_bytes()).ok();
            }
        });
        (format!("http://{addr}/label"), hits)
    }

    #[test]
    fn remote_labeler_builds_trace_from_response() {
        let (endpoint, _) = stub_labeler(vec!["{\"labels\":[\"plan\",\"compute\"]}".into()], 0);
        let config = RemoteLabelerConfig::new(endpoint);
        let trace = extract_trace_remote("some text", &config, "case_1").unwrap();
        assert_eq!(trace.activities(), ["plan", "compute"]);
        assert_eq!(trace.raw_text(), Some("some text"));
    }

    #[test]
    fn remote_labeler_retries_transport_failures() {
        let (endpoint, hits) = stub_labeler(vec!["{\"labels\":[\"verify\"]}".into()], 2);
        let mut config = RemoteLabelerConfig::new(endpoint);
        config.max_retries = 3;
        let trace = extract_trace_remote("text", &config, "case_1").unwrap();
        assert_eq!(trace.activities(), ["verify"]);
        assert_eq!(hits.load(Ordering::SeqCst), 3);
    }

    #[test]
    fn remote_labeler_gives_up_after_retries() {
        let (endpoint, hits) = stub_labeler(vec![], 10);
        let mut config = RemoteLabelerConfig::new(endpoint);
        config.max_retries = 2;
        let err = extract_trace_remote("text", &config, "case_1").unwrap_err();
        assert!(matches!(
            err,
            ExtractError::LabelerUnavailable { attempts: 3, .. }
        ));
        assert_eq!(hits.load(Ordering::SeqCst), 3);
    }

    #[test]
    fn remote_labeler_rejects_malformed_body_without_retry() {
        let (endpoint, hits) = stub_labeler(vec!["not json".into()], 0);
        let mut config = RemoteLabelerConfig::new(endpoint);
        config.max_retries = 5;
        let err = extract_trace_remote("text", &config, "case_1").unwrap_err();
        assert!(matches!(err, ExtractError::LabelerBadResponse(_)));
        assert_eq!(hits.load(Ordering::SeqCst), 1);
    }

    #[test]
    fn remote_labeler_rejects_empty_label_list() {
        let (endpoint, _) = stub_labeler(vec!["{\"labels\":[]}".into()], 0);
        let config = RemoteLabelerConfig::new(endpoint);
        let err = extract_trace_remote("text", &config, "case_1").unwrap_err();
        assert!(matches!(err, ExtractError::LabelerBadResponse(_)));
    }
}
