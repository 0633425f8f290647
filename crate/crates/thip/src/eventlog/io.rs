//! Event log serialization: JSON Lines and a small XES subset.
//!
//! The JSONL form writes one record per trace:
//! `{"case": "...", "events": ["...", ...], "meta": {"raw_text": "..."}}`,
//! omitting `meta` when the trace has no raw text. The XES form covers plain
//! logs only: a `<log>` of `<trace>` elements, each holding a
//! `concept:name` string attribute, an optional `raw_text` string attribute,
//! and `<event>` children with `concept:name`. Unknown elements are skipped
//! on read; both formats round-trip everything this crate produces.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use quick_xml::events::{BytesDecl, BytesEnd, BytesStart, Event};
use quick_xml::{Reader, Writer as XmlWriter};
use serde::{Deserialize, Serialize};

use super::{EventLog, LogError, Trace};

/// Supported on-disk log encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogFormat {
    Jsonl,
    Xes,
}

impl LogFormat {
    /// Parses a format name as used by CLI flags.
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "jsonl" => Some(Self::Jsonl),
            "xes" => Some(Self::Xes),
            _ => None,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonlRecord {
    case: String,
    events: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    meta: Option<JsonlMeta>,
}

#[derive(Serialize, Deserialize)]
struct JsonlMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    raw_text: Option<String>,
}

/// Reads a log in the given format from any reader.
pub fn read_log<R: Read>(reader: R, format: LogFormat) -> Result<EventLog, LogError> {
    match format {
        LogFormat::Jsonl => read_jsonl(reader),
        LogFormat::Xes => read_xes(reader),
    }
}

/// Writes a log in the given format to any writer.
pub fn write_log<W: Write>(writer: W, log: &EventLog, format: LogFormat) -> Result<(), LogError> {
    match format {
        LogFormat::Jsonl => write_jsonl(writer, log),
        LogFormat::Xes => write_xes(writer, log),
    }
}

/// Reads a log from a file, picking the decoder from `format`.
pub fn read_log_file(path: &Path, format: LogFormat) -> Result<EventLog, LogError> {
    let file = File::open(path)?;
    read_log(BufReader::new(file), format)
}

/// Writes a log to a file, picking the encoder from `format`.
pub fn write_log_file(path: &Path, log: &EventLog, format: LogFormat) -> Result<(), LogError> {
    let file = File::create(path)?;
    write_log(BufWriter::new(file), log, format)
}

fn read_jsonl<R: Read>(reader: R) -> Result<EventLog, LogError> {
    let mut traces = Vec::new();
    for (index, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let number = index + 1;
        if line.trim().is_empty() {
            continue;
        }
        let record: JsonlRecord =
            serde_json::from_str(&line).map_err(|e| LogError::MalformedRecord {
                line: number,
                message: e.to_string(),
            })?;
        let mut trace =
            Trace::new(record.case, record.events).map_err(|e| LogError::MalformedRecord {
                line: number,
                message: e.to_string(),
            })?;
        if let Some(raw) = record.meta.and_then(|m| m.raw_text) {
            trace = trace.with_raw_text(raw);
        }
        traces.push(trace);
    }
    EventLog::new(traces)
}

fn write_jsonl<W: Write>(mut writer: W, log: &EventLog) -> Result<(), LogError> {
    for trace in log.traces() {
        let record = JsonlRecord {
            case: trace.case_id().to_string(),
            events: trace.activities().to_vec(),
            meta: trace.raw_text().map(|raw| JsonlMeta {
                raw_text: Some(raw.to_string()),
            }),
        };
        let line = serde_json::to_string(&record).expect("log records are serializable");
        writeln!(writer, "{line}")?;
    }
    Ok(())
}

fn xml_error(reader_position: u64, message: impl std::fmt::Display) -> LogError {
    LogError::MalformedRecord {
        line: reader_position as usize,
        message: message.to_string(),
    }
}

fn string_attribute(element: &BytesStart<'_>, position: u64) -> Result<(String, String), LogError> {
    let mut key = None;
    let mut value = None;
    for attr in element.attributes() {
        let attr = attr.map_err(|e| xml_error(position, e))?;
        let text = attr
            .unescape_value()
            .map_err(|e| xml_error(position, e))?
            .into_owned();
        match attr.key.as_ref() {
            b"key" => key = Some(text),
            b"value" => value = Some(text),
            _ => {}
        }
    }
    match (key, value) {
        (Some(k), Some(v)) => Ok((k, v)),
        _ => Err(xml_error(
            position,
            "<string> element is missing a key or value attribute",
        )),
    }
}

#[derive(Default)]
struct XesTraceState {
    case_id: Option<String>,
    raw_text: Option<String>,
    events: Vec<String>,
}

struct XesParser {
    traces: Vec<Trace>,
    current_trace: Option<XesTraceState>,
    current_event: Option<Option<String>>,
}

impl XesParser {
    fn open_trace(&mut self, position: u64) -> Result<(), LogError> {
        if self.current_trace.is_some() {
            return Err(xml_error(position, "nested <trace> elements"));
        }
        self.current_trace = Some(XesTraceState::default());
        Ok(())
    }

    fn open_event(&mut self, position: u64) -> Result<(), LogError> {
        if self.current_trace.is_none() {
            return Err(xml_error(position, "<event> outside of a <trace>"));
        }
        if self.current_event.is_some() {
            return Err(xml_error(position, "nested <event> elements"));
        }
        self.current_event = Some(None);
        Ok(())
    }

    fn string(&mut self, element: &BytesStart<'_>, position: u64) -> Result<(), LogError> {
        let (key, value) = string_attribute(element, position)?;
        if let Some(label) = self.current_event.as_mut() {
            if key == "concept:name" {
                *label = Some(value);
            }
        } else if let Some(trace) = self.current_trace.as_mut() {
            match key.as_str() {
                "concept:name" => trace.case_id = Some(value),
                "raw_text" => trace.raw_text = Some(value),
                _ => {}
            }
        }
        Ok(())
    }

    fn close_trace(&mut self, position: u64) -> Result<(), LogError> {
        let state = self
            .current_trace
            .take()
            .ok_or_else(|| xml_error(position, "unexpected </trace>"))?;
        let case_id = state.case_id.ok_or_else(|| {
            xml_error(
                position,
                format!(
                    "trace {} is missing a concept:name attribute",
                    self.traces.len() + 1
                ),
            )
        })?;
        let mut trace = Trace::new(case_id, state.events).map_err(|e| xml_error(position, e))?;
        if let Some(raw) = state.raw_text {
            trace = trace.with_raw_text(raw);
        }
        self.traces.push(trace);
        Ok(())
    }

    fn close_event(&mut self, position: u64) -> Result<(), LogError> {
        let label = self
            .current_event
            .take()
            .ok_or_else(|| xml_error(position, "unexpected </event>"))?
            .ok_or_else(|| xml_error(position, "event is missing a concept:name attribute"))?;
        if let Some(trace) = self.current_trace.as_mut() {
            trace.events.push(label);
        }
        Ok(())
    }
}

fn read_xes<R: Read>(reader: R) -> Result<EventLog, LogError> {
    let mut xml = Reader::from_reader(BufReader::new(reader));
    xml.config_mut().trim_text(true);

    let mut parser = XesParser {
        traces: Vec::new(),
        current_trace: None,
        current_event: None,
    };
    let mut buf = Vec::new();
    let mut skip_buf = Vec::new();

    loop {
        let position = xml.buffer_position();
        match xml.read_event_into(&mut buf) {
            Err(e) => return Err(xml_error(position, e)),
            Ok(Event::Eof) => break,
            Ok(Event::Start(e)) => match e.name().as_ref() {
                b"log" => {}
                b"trace" => parser.open_trace(position)?,
                b"event" => parser.open_event(position)?,
                b"string" => parser.string(&e, position)?,
                _ => {
                    let end = e.to_end().into_owned();
                    xml.read_to_end_into(end.name(), &mut skip_buf)
                        .map_err(|e| xml_error(position, e))?;
                }
            },
            Ok(Event::Empty(e)) => match e.name().as_ref() {
                b"trace" => {
                    parser.open_trace(position)?;
                    parser.close_trace(position)?;
                }
                b"event" => {
                    parser.open_event(position)?;
                    parser.close_event(position)?;
                }
                b"string" => parser.string(&e, position)?,
                _ => {}
            },
            Ok(Event::End(e)) => match e.name().as_ref() {
                b"trace" => parser.close_trace(position)?,
                b"event" => parser.close_event(position)?,
                _ => {}
            },
            Ok(_) => {}
        }
        buf.clear();
    }
    if parser.current_trace.is_some() || parser.current_event.is_some() {
        return Err(xml_error(
            xml.buffer_position(),
            "document ended inside an open element",
        ));
    }
    EventLog::new(parser.traces)
}

fn xml_write_error(err: quick_xml::Error) -> LogError {
    LogError::Io(std::io::Error::other(err))
}

fn write_string_attr<W: Write>(
    xml: &mut XmlWriter<W>,
    key: &str,
    value: &str,
) -> Result<(), LogError> {
    let mut element = BytesStart::new("string");
    element.push_attribute(("key", key));
    element.push_attribute(("value", value));
    xml.write_event(Event::Empty(element)).map_err(xml_write_error)
}

fn write_xes<W: Write>(writer: W, log: &EventLog) -> Result<(), LogError> {
    let mut xml = XmlWriter::new_with_indent(writer, b' ', 2);
    xml.write_event(Event::Decl(BytesDecl::new("1.0", Some("UTF-8"), None)))
        .map_err(xml_write_error)?;
    xml.write_event(Event::Start(BytesStart::new("log")))
        .map_err(xml_write_error)?;
    for trace in log.traces() {
        xml.write_event(Event::Start(BytesStart::new("trace")))
            .map_err(xml_write_error)?;
        write_string_attr(&mut xml, "concept:name", trace.case_id())?;
        if let Some(raw) = trace.raw_text() {
            write_string_attr(&mut xml, "raw_text", raw)?;
        }
        for label in trace.activities() {
            xml.write_event(Event::Start(BytesStart::new("event")))
                .map_err(xml_write_error)?;
            write_string_attr(&mut xml, "concept:name", label)?;
            xml.write_event(Event::End(BytesEnd::new("event")))
                .map_err(xml_write_error)?;
        }
        xml.write_event(Event::End(BytesEnd::new("trace")))
            .map_err(xml_write_error)?;
    }
    xml.write_event(Event::End(BytesEnd::new("log")))
        .map_err(xml_write_error)?;
    let mut inner = xml.into_inner();
    writeln!(inner)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample_log() -> EventLog {
        let t1 = Trace::new("t1", ["plan", "compute", "verify"])
            .unwrap()
            .with_raw_text("First plan, then compute 2+2, then check it.");
        let t2 = Trace::new("t2", ["compute"]).unwrap();
        let t3 = Trace::new("t3", Vec::<String>::new()).unwrap();
        EventLog::new(vec![t1, t2, t3]).unwrap()
    }

    // --- jsonl ---

    #[test]
    fn jsonl_round_trips_traces_and_raw_text() {
        let log = sample_log();
        let mut buf = Vec::new();
        write_log(&mut buf, &log, LogFormat::Jsonl).unwrap();
        let back = read_log(&buf[..], LogFormat::Jsonl).unwrap();
        assert_eq!(back, log);
    }

    #[test]
    fn jsonl_omits_meta_without_raw_text() {
        let log = EventLog::new(vec![Trace::new("t1", ["a"]).unwrap()]).unwrap();
        let mut buf = Vec::new();
        write_log(&mut buf, &log, LogFormat::Jsonl).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "{\"case\":\"t1\",\"events\":[\"a\"]}\n");
    }

    #[test]
    fn jsonl_reports_malformed_line_number() {
        let input = "{\"case\":\"t1\",\"events\":[\"a\"]}\nnot json\n";
        let err = read_log(input.as_bytes(), LogFormat::Jsonl).unwrap_err();
        match err {
            LogError::MalformedRecord { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn jsonl_rejects_unknown_fields() {
        let input = "{\"case\":\"t1\",\"events\":[],\"extra\":1}\n";
        let err = read_log(input.as_bytes(), LogFormat::Jsonl).unwrap_err();
        assert!(matches!(err, LogError::MalformedRecord { line: 1, .. }));
    }

    #[test]
    fn jsonl_rejects_duplicate_case_ids() {
        let input = "{\"case\":\"t1\",\"events\":[]}\n{\"case\":\"t1\",\"events\":[]}\n";
        let err = read_log(input.as_bytes(), LogFormat::Jsonl).unwrap_err();
        assert!(matches!(err, LogError::DuplicateCaseId(_)));
    }

    #[test]
    fn jsonl_skips_blank_lines() {
        let input = "\n{\"case\":\"t1\",\"events\":[\"a\"]}\n\n";
        let log = read_log(input.as_bytes(), LogFormat::Jsonl).unwrap();
        assert_eq!(log.len(), 1);
    }

    // --- xes ---

    #[test]
    fn xes_round_trips_traces_and_raw_text() {
        let log = sample_log();
        let mut buf = Vec::new();
        write_log(&mut buf, &log, LogFormat::Xes).unwrap();
        let back = read_log(&buf[..], LogFormat::Xes).unwrap();
        assert_eq!(back, log);
    }

    #[test]
    fn xes_escapes_reserved_characters() {
        let log = EventLog::new(vec![Trace::new("t<1>", ["a&b"])
            .unwrap()
            .with_raw_text("\"quoted\" <text>")])
        .unwrap();
        let mut buf = Vec::new();
        write_log(&mut buf, &log, LogFormat::Xes).unwrap();
        let back = read_log(&buf[..], LogFormat::Xes).unwrap();
        assert_eq!(back, log);
    }

    #[test]
    fn xes_skips_unknown_elements() {
        let input = r#"<?xml version="1.0"?>
<log>
  <extension name="Concept" prefix="concept" uri="http://example.org"/>
  <trace>
    <string key="concept:name" value="t1"/>
    <date key="time:timestamp" value="2024-01-01"/>
    <event>
      <string key="concept:name" value="a"/>
      <string key="lifecycle:transition" value="complete"/>
    </event>
  </trace>
</log>
"#;
        let log = read_log(input.as_bytes(), LogFormat::Xes).unwrap();
        assert_eq!(log.traces()[0].case_id(), "t1");
        assert_eq!(log.traces()[0].activities(), ["a"]);
    }

    #[test]
    fn xes_rejects_trace_without_case_id() {
        let input = "<log><trace><event><string key=\"concept:name\" value=\"a\"/></event></trace></log>";
        let err = read_log(input.as_bytes(), LogFormat::Xes).unwrap_err();
        assert!(matches!(err, LogError::MalformedRecord { .. }));
    }

    #[test]
    fn xes_rejects_event_without_label() {
        let input =
            "<log><trace><string key=\"concept:name\" value=\"t1\"/><event/></trace></log>";
        let err = read_log(input.as_bytes(), LogFormat::Xes).unwrap_err();
        assert!(matches!(err, LogError::MalformedRecord { .. }));
    }

    #[test]
    fn xes_rejects_truncated_document() {
        let input = "<log><trace><string key=\"concept:name\" value=\"t1\"/>";
        let err = read_log(input.as_bytes(), LogFormat::Xes).unwrap_err();
        assert!(matches!(err, LogError::MalformedRecord { .. }));
    }

    // --- property: both formats round-trip arbitrary logs ---

    fn arb_label() -> impl Strategy<Value = String> {
        "[a-z][a-z0-9_:]{0,6}"
    }

    fn arb_log() -> impl Strategy<Value = EventLog> {
        prop::collection::vec(
            (
                prop::collection::vec(arb_label(), 0..5),
                prop::option::of(".{0,20}"),
            ),
            0..5,
        )
        .prop_map(|specs| {
            let traces = specs
                .into_iter()
                .enumerate()
                .map(|(i, (labels, raw))| {
                    let mut t = Trace::new(format!("case_{i}"), labels).unwrap();
                    if let Some(raw) = raw {
                        t = t.with_raw_text(raw);
                    }
                    t
                })
                .collect();
            EventLog::new(traces).unwrap()
        })
    }

    proptest! {
        #[test]
        fn round_trip_jsonl(log in arb_log()) {
            let mut buf = Vec::new();
            write_log(&mut buf, &log, LogFormat::Jsonl).unwrap();
            let back = read_log(&buf[..], LogFormat::Jsonl).unwrap();
            prop_assert_eq!(back, log);
        }

        #[test]
        fn round_trip_xes(log in arb_log()) {
            let mut buf = Vec::new();
            write_log(&mut buf, &log, LogFormat::Xes).unwrap();
            let back = read_log(&buf[..], LogFormat::Xes).unwrap();
            prop_assert_eq!(back, log);
        }
    }
}
