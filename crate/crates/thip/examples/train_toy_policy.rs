//! Optimize the toy n-gram policy on the built-in synthetic task and
//! watch the reward components climb.
//!
//! The policy starts able to render well-formed responses but indifferent
//! about reasoning order and answer choice; training must discover the
//! teacher's step order (for the conformance reward) and the correct boxed
//! answer (for the answer reward).
//!
//! Run with: `cargo run --release --example train_toy_policy`

use std::error::Error;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thip::gspo::{train, GspoConfig, SyntheticTask};

fn main() -> Result<(), Box<dyn Error>> {
    let task = SyntheticTask::linear(
        &["a", "b", "c"],
        "4",
        "Reason through the teacher's steps, then box the answer.",
    )?;
    println!("teacher model: {}", task.teacher_model());
    println!("vocabulary:    {:?}\n", task.vocabulary());

    let config = GspoConfig::default();
    println!(
        "training: {} steps, groups of {}, clip {}, learning rate {}\n",
        config.steps, config.group_size, config.clip, config.learning_rate
    );
    let report = train(&task, &config)?;

    println!("step    format  answer  conf    total");
    for record in report.steps.iter().step_by(250) {
        println!(
            "{:<7} {:<7.3} {:<7.3} {:<7.3} {:.3}",
            record.step,
            record.mean_format,
            record.mean_answer,
            record.mean_conformance,
            record.mean_total
        );
    }
    let means = report.window_means(100);
    println!(
        "\nfinal 100 steps: format={:.3} answer={:.3} conformance={:.3}",
        means.format, means.answer, means.conformance
    );

    println!("\nsamples from the trained policy:");
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..4 {
        let (tokens, _) = report.final_params.sample_sequence(&mut rng, config.max_length);
        println!("  {}", report.final_params.render(&tokens));
    }
    Ok(())
}
