//! Desk-scale training loop: optimize the n-gram policy against the
//! process-conformance reward on a synthetic task.
//!
//! A [`SyntheticTask`] bundles a teacher process model, a reference answer,
//! and decoy answers into a self-contained training problem. Its vocabulary
//! contains the teacher's activity labels, the think markers, one boxed
//! token per answer, and the end token, so the policy can express a fully
//! well-formed response and the extraction rules can parse everything the
//! policy renders. Each step samples a fresh group from the current policy,
//! scores it with the full reward pipeline against a teacher trace drawn
//! from the model, and applies one exact gradient step on the clipped
//! group-sequence objective.

use std::collections::BTreeSet;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::policy::{PolicyParams, EOS_TOKEN};
use super::{gspo_gradient, gspo_objective, sample_group, GspoConfig, GspoError};
use crate::discovery::ProcessTree;
use crate::eventlog::{EventLog, Trace};
use crate::extract::ExtractionRules;
use crate::reward::{total_reward, Query, RolloutText};

/// A self-contained training problem.
#[derive(Debug, Clone)]
pub struct SyntheticTask {
    teacher_model: ProcessTree,
    answer: String,
    decoy_answers: Vec<String>,
    query: Query,
}

impl SyntheticTask {
    /// Builds a task from a teacher model and its reference answer.
    ///
    /// Activity labels must not collide with the think markers, the boxed
    /// answer tokens, or the end token.
    pub fn new(
        teacher_model: ProcessTree,
        answer: impl Into<String>,
        prompt: impl Into<String>,
    ) -> Result<Self, GspoError> {
        let answer = answer.into();
        if answer.trim().is_empty() {
            return Err(GspoError::BadConfig("task answer must not be blank".into()));
        }
        teacher_model
            .validate()
            .map_err(|e| GspoError::BadConfig(format!("teacher model: {e}")))?;
        if teacher_model.alphabet().is_empty() {
            return Err(GspoError::BadConfig(
                "teacher model must have at least one visible activity".into(),
            ));
        }
        let task = Self {
            teacher_model,
            answer,
            decoy_answers: vec!["0".into()],
            query: Query {
                id: "train".into(),
                prompt: prompt.into(),
                ground_truth: String::new(),
            },
        };
        let mut task = task;
        task.query.ground_truth = task.answer.clone();
        if task.decoy_answers.contains(&task.answer) {
            task.decoy_answers = vec!["decoy".into()];
        }
        task.check_vocabulary()?;
        Ok(task)
    }

    /// A linear teacher: the given activities in sequence.
    pub fn linear(labels: &[&str], answer: &str, prompt: &str) -> Result<Self, GspoError> {
        let children = labels
            .iter()
            .map(|l| ProcessTree::leaf(*l))
            .collect::<Vec<_>>();
        Self::new(ProcessTree::Sequence(children), answer, prompt)
    }

    /// Replaces the decoy answers offered to the policy.
    pub fn with_decoys(mut self, decoys: &[&str]) -> Result<Self, GspoError> {
        self.decoy_answers = decoys.iter().map(|d| d.to_string()).collect();
        let mut seen = BTreeSet::from([self.answer.clone()]);
        for decoy in &self.decoy_answers {
            if decoy.trim().is_empty() {
                return Err(GspoError::BadConfig("decoy answers must not be blank".into()));
            }
            if !seen.insert(decoy.clone()) {
                return Err(GspoError::BadConfig(format!(
                    "decoy answer {decoy:?} duplicates another answer"
                )));
            }
        }
        self.check_vocabulary()?;
        Ok(self)
    }

    fn check_vocabulary(&self) -> Result<(), GspoError> {
        let reserved: BTreeSet<String> = self
            .vocabulary()
            .into_iter()
            .filter(|t| !self.teacher_model.alphabet().contains(t))
            .collect();
        for label in self.teacher_model.alphabet() {
            if reserved.contains(&label) {
                return Err(GspoError::BadConfig(format!(
                    "activity label {label:?} collides with a reserved token"
                )));
            }
            if label.chars().any(char::is_whitespace) {
                return Err(GspoError::BadConfig(format!(
                    "activity label {label:?} must not contain whitespace"
                )));
            }
        }
        Ok(())
    }

    pub fn teacher_model(&self) -> &ProcessTree {
        &self.teacher_model
    }

    pub fn answer(&self) -> &str {
        &self.answer
    }

    pub fn query(&self) -> &Query {
        &self.query
    }

    /// The policy vocabulary: activity labels in sorted order, the think
    /// markers, one boxed token per answer, and the end token.
    pub fn vocabulary(&self) -> Vec<String> {
        let mut vocab: Vec<String> = self.teacher_model.alphabet().into_iter().collect();
        vocab.push("<think>".into());
        vocab.push("</think>".into());
        vocab.push(format!("\\boxed{{{}}}", self.answer));
        for decoy in &self.decoy_answers {
            vocab.push(format!("\\boxed{{{decoy}}}"));
        }
        vocab.push(EOS_TOKEN.into());
        vocab
    }

    /// Extraction rules matching the task's rendered rollouts: whitespace
    /// segmentation and exact-match labeling of the teacher's activities.
    pub fn rules(&self) -> ExtractionRules {
        let delimiters = vec![r"\s+".to_string()];
        let label_rules: Vec<(String, String)> = self
            .teacher_model
            .alphabet()
            .into_iter()
            .map(|label| (format!("^{}$", regex::escape(&label)), label))
            .collect();
        ExtractionRules::new(&delimiters, &label_rules, "offtask", 64)
            .expect("task rules always compile")
    }

    /// Draws one teacher demonstration from the teacher model.
    pub fn sample_teacher_trace<R: Rng>(&self, rng: &mut R) -> Trace {
        let activities = self.teacher_model.sample(rng);
        Trace::new("teacher", activities).expect("teacher labels are validated")
    }

    /// A starting policy that renders well-formed responses but has no
    /// preference among reasoning steps or candidate answers.
    ///
    /// The skeleton transitions get a logit head start of `bias`: open the
    /// think region first, box an answer right after closing it, and stop
    /// after answering. All candidate answers share the head start equally,
    /// and inside the think region the activity labels and the closing
    /// marker stay uniform among themselves, so training still has to
    /// discover the reasoning order and pick the correct answer.
    pub fn format_primed_policy(&self, bias: f64) -> Result<PolicyParams, GspoError> {
        if !bias.is_finite() || bias < 0.0 {
            return Err(GspoError::BadConfig(
                "prime bias must be finite and non-negative".into(),
            ));
        }
        let mut params = PolicyParams::uniform(self.vocabulary(), 1)?;
        let id = |token: &str| params.token_id(token).expect("token is in the vocabulary");
        let open = id("<think>");
        let close = id("</think>");
        let eos = id(EOS_TOKEN);
        let activities: Vec<_> = self
            .teacher_model
            .alphabet()
            .iter()
            .map(|l| id(l))
            .collect();
        let mut boxed = vec![id(&format!("\\boxed{{{}}}", self.answer))];
        for decoy in &self.decoy_answers {
            boxed.push(id(&format!("\\boxed{{{decoy}}}")));
        }
        let mut in_region = activities.clone();
        in_region.push(close);

        let vocab_len = params.vocabulary().len();
        let favor = |params: &mut PolicyParams, context: Vec<_>, targets: &[usize]| {
            let mut values = vec![0.0; vocab_len];
            for &t in targets {
                values[t] = bias;
            }
            params
                .set_logits(&context, values)
                .expect("vector length matches the vocabulary");
        };
        favor(&mut params, vec![], &[open]);
        favor(&mut params, vec![open], &activities);
        for &a in &activities {
            favor(&mut params, vec![a], &in_region);
        }
        favor(&mut params, vec![close], &boxed);
        for &b in &boxed {
            favor(&mut params, vec![b], &[eos]);
        }
        Ok(params)
    }
}

/// Multipliers applied to the reward components when forming the scalar
/// the trainer optimizes. The defaults keep the plain three-way sum;
/// emitted step records always report the unweighted component means.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardWeights {
    pub format: f64,
    pub answer: f64,
    pub conformance: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        Self {
            format: 1.0,
            answer: 1.0,
            conformance: 1.0,
        }
    }
}

impl RewardWeights {
    pub fn validate(&self) -> Result<(), GspoError> {
        for (name, value) in [
            ("format", self.format),
            ("answer", self.answer),
            ("conformance", self.conformance),
        ] {
            if !value.is_finite() || value < 0.0 {
                return Err(GspoError::BadConfig(format!(
                    "{name} weight must be finite and non-negative, got {value}"
                )));
            }
        }
        if self.format + self.answer + self.conformance == 0.0 {
            return Err(GspoError::BadConfig(
                "at least one reward weight must be positive".into(),
            ));
        }
        Ok(())
    }

    /// The weighted scalar reward for one response.
    pub fn combine(&self, breakdown: &crate::reward::RewardBreakdown) -> f64 {
        self.format * breakdown.format
            + self.answer * breakdown.answer
            + self.conformance * breakdown.conformance
    }
}

/// Per-step training metrics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepRecord {
    pub step: usize,
    pub mean_format: f64,
    pub mean_answer: f64,
    pub mean_conformance: f64,
    pub mean_total: f64,
    pub objective: f64,
}

/// Mean reward components over a window of steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowMeans {
    pub format: f64,
    pub answer: f64,
    pub conformance: f64,
    pub total: f64,
}

/// The outcome of a training run.
#[derive(Debug, Clone, Serialize)]
pub struct TrainerReport {
    pub steps: Vec<StepRecord>,
    pub final_params: PolicyParams,
}

impl TrainerReport {
    /// Mean reward components over the last `window` steps (or all steps,
    /// when fewer exist).
    pub fn window_means(&self, window: usize) -> WindowMeans {
        let tail_start = self.steps.len().saturating_sub(window);
        let tail = &self.steps[tail_start..];
        let n = tail.len().max(1) as f64;
        WindowMeans {
            format: tail.iter().map(|s| s.mean_format).sum::<f64>() / n,
            answer: tail.iter().map(|s| s.mean_answer).sum::<f64>() / n,
            conformance: tail.iter().map(|s| s.mean_conformance).sum::<f64>() / n,
            total: tail.iter().map(|s| s.mean_total).sum::<f64>() / n,
        }
    }

    /// Writes one JSON object per step record.
    pub fn write_step_jsonl<W: Write>(&self, mut writer: W) -> std::io::Result<()> {
        for record in &self.steps {
            let line = serde_json::to_string(record).expect("step records serialize");
            writeln!(writer, "{line}")?;
        }
        Ok(())
    }
}

/// Logit head start used by [`train`] for the response skeleton.
pub const DEFAULT_PRIME_BIAS: f64 = 4.0;

/// Trains a format-primed policy on `task`. See [`train_from`].
///
/// The starting point comes from [`SyntheticTask::format_primed_policy`]:
/// it can render well-formed responses but is indifferent about reasoning
/// order and answer choice, mirroring reinforcement learning on top of a
/// supervised-finetuned base. Pass [`train_from`] an explicit policy to
/// start elsewhere, for example from [`PolicyParams::uniform`].
pub fn train(task: &SyntheticTask, config: &GspoConfig) -> Result<TrainerReport, GspoError> {
    let params = task.format_primed_policy(DEFAULT_PRIME_BIAS)?;
    train_from(params, task, config)
}

/// Runs `config.steps` optimization steps starting from `params` with the
/// default, unweighted reward sum. See [`train_weighted`].
pub fn train_from(
    params: PolicyParams,
    task: &SyntheticTask,
    config: &GspoConfig,
) -> Result<TrainerReport, GspoError> {
    train_weighted(params, task, config, &RewardWeights::default())
}

/// Runs `config.steps` optimization steps starting from `params`.
///
/// Each step draws a teacher trace and a sampling seed from a master
/// generator seeded with `config.seed`, samples a group from the current
/// policy, scores it with the reward pipeline, and applies one gradient
/// step on the clipped objective. The scalar reward driving advantages is
/// `weights.combine(breakdown)`; step records report unweighted component
/// means next to the weighted total. The whole run is a pure function of
/// (initial params, task, config, weights): reruns produce identical
/// reports.
pub fn train_weighted(
    mut params: PolicyParams,
    task: &SyntheticTask,
    config: &GspoConfig,
    weights: &RewardWeights,
) -> Result<TrainerReport, GspoError> {
    config.validate()?;
    weights.validate()?;
    let rules = task.rules();
    let query = task.query().clone();
    let mut master = ChaCha8Rng::seed_from_u64(config.seed);
    let mut steps = Vec::with_capacity(config.steps);

    for step in 0..config.steps {
        let sample_seed: u64 = master.gen();
        let teacher = EventLog::from_trace(task.sample_teacher_trace(&mut master));

        let mut rollout = sample_group(&params, &query, config, sample_seed);
        let group_size = rollout.group_size() as f64;
        let mut mean_format = 0.0;
        let mut mean_answer = 0.0;
        let mut mean_conformance = 0.0;
        let mut rewards = Vec::with_capacity(rollout.group_size());
        for text in &rollout.texts {
            let parsed = RolloutText::parse(text.clone());
            let breakdown = total_reward(&query, &parsed, &teacher, &rules);
            mean_format += breakdown.format / group_size;
            mean_answer += breakdown.answer / group_size;
            mean_conformance += breakdown.conformance / group_size;
            rewards.push(weights.combine(&breakdown));
        }
        let mean_total = rewards.iter().sum::<f64>() / group_size;
        rollout.assign_rewards(rewards)?;
        rollout.refresh_ratios(&params)?;
        let objective = gspo_objective(&rollout, config)?;
        let grad = gspo_gradient(&params, &rollout, config)?;
        params.apply_gradient(&grad, config.learning_rate);

        steps.push(StepRecord {
            step,
            mean_format,
            mean_answer,
            mean_conformance,
            mean_total,
            objective,
        });
    }
    Ok(TrainerReport {
        steps,
        final_params: params,
    })
}
