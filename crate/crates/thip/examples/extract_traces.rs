//! Segment free-form reasoning text into labeled activity traces, with
//! the default taxonomy and with custom rules.
//!
//! Run with: `cargo run --example extract_traces`

use std::error::Error;

use thip::extract::{extract_trace, think_region, ExtractionRules};

const RESPONSE: &str = "<think>First, I plan to factor the expression. \
Recall that x^2 - 9 = (x-3)(x+3). \
Compute 12 / 4 = 3 for the root. \
Wait, that ignores the sign. \
Check the negative branch too. \
So both roots work.</think> The answer is \\boxed{3}.";

fn main() -> Result<(), Box<dyn Error>> {
    println!("think region:\n{:?}\n", think_region(RESPONSE).unwrap());

    let rules = ExtractionRules::default();
    let trace = extract_trace(RESPONSE, &rules, "episode-1");
    println!("default taxonomy labels each sentence:");
    for activity in trace.activities() {
        println!("  {activity}");
    }

    let custom = ExtractionRules::new(
        &[r";\s*".to_string()],
        &[
            (r"(?i)fetch".to_string(), "fetch".to_string()),
            (r"(?i)transform|map".to_string(), "transform".to_string()),
            (r"(?i)store|save".to_string(), "store".to_string()),
        ],
        "other",
        16,
    )?;
    let pipeline_note = "fetch the rows; map them to records; save to disk; notify the owner";
    let trace = extract_trace(pipeline_note, &custom, "etl-1");
    println!("\ncustom rules segment on semicolons:");
    for activity in trace.activities() {
        println!("  {activity}");
    }

    let trace = extract_trace("???", &rules, "fallback");
    println!(
        "\nunextractable text still yields a trace: {:?}",
        trace.activities()
    );
    Ok(())
}
