//! Score policy responses with the three-part reward: format, answer,
//! and process conformance against a teacher demonstration.
//!
//! Run with: `cargo run --example score_rollouts`

use std::error::Error;

use thip::eventlog::{EventLog, Trace};
use thip::extract::ExtractionRules;
use thip::reward::{total_reward, Query, RolloutText};

fn main() -> Result<(), Box<dyn Error>> {
    let teacher = EventLog::from_trace(Trace::new("teacher", [
        "plan", "compute", "verify", "conclude",
    ])?);
    let rules = ExtractionRules::default();
    let query = Query {
        id: "q-17".into(),
        prompt: "What is 6 * 7?".into(),
        ground_truth: "42".into(),
    };

    let rollouts = [
        (
            "faithful",
            "<think>Plan: multiply directly. Compute 6 * 7 = 42. \
             Verify by adding 6 seven times. So the product is 42.</think> \\boxed{42}",
        ),
        (
            "right answer, no reasoning",
            "The answer is \\boxed{42}.",
        ),
        (
            "reasoned but wrong",
            "<think>Plan: multiply. Compute 6 * 7 = 43. So it is 43.</think> \\boxed{43}",
        ),
        (
            "different process",
            "<think>Recall the times table. Recall again to be sure.</think> \\boxed{42}",
        ),
        (
            "equivalent numeric form",
            "<think>Plan: multiply. Compute 6 * 7 = 42. Verify once more. \
             So done.</think> \\boxed{42.0}",
        ),
    ];

    println!("{:<28} format  answer  conf    total", "rollout");
    for (name, text) in rollouts {
        let parsed = RolloutText::parse(text.to_string());
        let reward = total_reward(&query, &parsed, &teacher, &rules);
        println!(
            "{name:<28} {:<7.3} {:<7.3} {:<7.3} {:.3}",
            reward.format, reward.answer, reward.conformance, reward.total
        );
    }
    println!("\nthe total is always format + answer + conformance, each in [0, 1]");
    Ok(())
}
