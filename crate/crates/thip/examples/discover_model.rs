//! Mine process trees from logs with different control-flow shapes and
//! compile one of them to a Petri net.
//!
//! Run with: `cargo run --example discover_model`

use std::error::Error;

use thip::discovery::{discover_tree, tree_to_petri};
use thip::eventlog::{EventLog, Trace};

fn log_from(traces: &[&[&str]]) -> Result<EventLog, Box<dyn Error>> {
    let traces = traces
        .iter()
        .enumerate()
        .map(|(i, events)| Trace::new(format!("t{i}"), events.iter().map(|e| e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(EventLog::new(traces)?)
}

fn main() -> Result<(), Box<dyn Error>> {
    let shapes: [(&str, &[&[&str]]); 5] = [
        ("plain sequence", &[&["a", "b", "c"]]),
        ("exclusive choice", &[&["a", "b"], &["c", "d"]]),
        ("interleaving", &[&["a", "b", "c"], &["a", "c", "b"]]),
        ("redo loop", &[&["a", "b"], &["a", "b", "r", "a", "b"]]),
        (
            "tangle (falls back to a flower)",
            &[&["a", "b", "a", "b"], &["a", "b"]],
        ),
    ];

    for (name, traces) in shapes {
        let log = log_from(traces)?;
        let tree = discover_tree(&log)?;
        println!("{name:<32} -> {tree}");
    }

    let log = log_from(&[&["a", "b", "c"], &["a", "c", "b"]])?;
    let tree = discover_tree(&log)?;
    let net = tree_to_petri(&tree)?;
    println!("\nthe interleaving tree compiles to this net:\n");
    print!("{}", net.to_text());

    println!("\nevery input trace replays on the discovered net:");
    for trace in log.traces() {
        let ok = net.replays(trace.activities())?;
        println!("  {:?} replays: {ok}", trace.activities());
        assert!(ok);
    }
    Ok(())
}
