//! Build an event log in code, round-trip it through both on-disk
//! formats, and inspect its directly-follows graph.
//!
//! Run with: `cargo run --example event_log_io`

use std::error::Error;

use thip::eventlog::{read_log, write_log, DirectlyFollowsGraph, EventLog, LogFormat, Trace};

fn main() -> Result<(), Box<dyn Error>> {
    let log = EventLog::new(vec![
        Trace::new("order-1", ["receive", "check", "pack", "ship"])?,
        Trace::new("order-2", ["receive", "pack", "check", "ship"])?,
        Trace::new("order-3", ["receive", "check", "reject"])?,
    ])?;
    println!("built a log with {} traces", log.traces().len());
    println!("alphabet: {:?}\n", log.alphabet());

    for format in [LogFormat::Jsonl, LogFormat::Xes] {
        let mut buffer = Vec::new();
        write_log(&mut buffer, &log, format)?;
        let text = String::from_utf8(buffer.clone())?;
        println!("--- {format:?} ({} bytes) ---", text.len());
        for line in text.lines().take(4) {
            println!("{line}");
        }
        println!("...\n");

        let back = read_log(&buffer[..], format)?;
        assert_eq!(back.traces().len(), log.traces().len());
        for (a, b) in back.traces().iter().zip(log.traces()) {
            assert_eq!(a.activities(), b.activities());
        }
        println!("{format:?} round-trip preserved every trace\n");
    }

    let dfg = DirectlyFollowsGraph::from_log(&log);
    println!("directly-follows edges (with frequencies):");
    for ((from, to), count) in dfg.edges() {
        println!("  {from} -> {to}  x{count}");
    }
    println!("start activities: {:?}", dfg.start_activities());
    println!("end activities:   {:?}", dfg.end_activities());
    Ok(())
}
