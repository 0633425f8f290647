//! Align traces against a discovered model and read the fitness,
//! precision, and F1 conformance scores.
//!
//! Run with: `cargo run --example check_conformance`

use std::error::Error;

use thip::conformance::{align, conformance_check, AlignmentMove};
use thip::discovery::discover_net;
use thip::eventlog::{EventLog, Trace};

fn main() -> Result<(), Box<dyn Error>> {
    let model_log = EventLog::new(vec![
        Trace::new("m1", ["plan", "compute", "verify", "conclude"])?,
        Trace::new("m2", ["plan", "compute", "compute", "verify", "conclude"])?,
    ])?;
    let net = discover_net(&model_log)?;
    println!("model mined from two demonstrations\n");

    let cases = [
        ("perfect", vec!["plan", "compute", "verify", "conclude"]),
        ("skips verify", vec!["plan", "compute", "conclude"]),
        ("foreign step", vec!["plan", "guess", "conclude"]),
    ];
    for (name, events) in cases {
        let trace: Vec<String> = events.iter().map(|e| e.to_string()).collect();
        let alignment = align(&net, &trace)?;
        println!("{name} (cost {}):", alignment.total_cost);
        for step in &alignment.moves {
            match step {
                AlignmentMove::Synchronous { label } => println!("  sync  {label}"),
                AlignmentMove::LogMove { label } => println!("  log   {label}"),
                AlignmentMove::ModelMove { label: Some(label) } => println!("  model {label}"),
                AlignmentMove::ModelMove { label: None } => println!("  tau"),
            }
        }
        println!();
    }

    let teacher = EventLog::from_trace(Trace::new("teacher", [
        "plan", "compute", "verify", "conclude",
    ])?);
    let result = conformance_check(&net, &teacher)?;
    println!(
        "against the teacher demonstration: fitness={:.6} precision={:.6} f1={:.6}",
        result.fitness, result.precision, result.f1
    );

    let sloppy_log = EventLog::from_trace(Trace::new("s", ["plan", "conclude"])?);
    let sloppy = conformance_check(&net, &sloppy_log)?;
    println!(
        "a model that skips steps scores lower:     fitness={:.6} precision={:.6} f1={:.6}",
        sloppy.fitness, sloppy.precision, sloppy.f1
    );
    Ok(())
}
