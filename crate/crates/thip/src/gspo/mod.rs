//! Group-relative, sequence-level clipped policy optimization.
//!
//! For each query the trainer samples a group of responses from a frozen
//! snapshot of the policy, scores each with the reward pipeline, and centers
//! the rewards within the group to get advantages (the group mean is
//! subtracted; no standard-deviation normalization is applied). Each
//! response carries a sequence-level importance ratio, the per-token
//! geometric mean `exp((log p_new - log p_old) / |y|)`, and contributes the
//! clipped surrogate `min(r * A, clip(r, 1-eps, 1+eps) * A)` to the
//! objective. Responses whose unclipped term loses the `min` are clipped out
//! and contribute exactly zero gradient.

mod policy;
mod trainer;

pub use policy::{PolicyGradient, PolicyParams, TokenId, EOS_TOKEN};
pub use trainer::{
    train, train_from, train_weighted, RewardWeights, StepRecord, SyntheticTask, TrainerReport,
    WindowMeans, DEFAULT_PRIME_BIAS,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::reward::Query;

/// Errors raised by policy construction, rollouts, and training.
#[derive(Debug, Error)]
pub enum GspoError {
    /// A policy invariant was violated.
    #[error("BadPolicy: {0}")]
    BadPolicy(String),

    /// A configuration value was out of range.
    #[error("BadConfig: {0}")]
    BadConfig(String),

    /// Advantages need at least two rollouts to compare.
    #[error("DegenerateGroup: group size must be at least 2, got {0}")]
    DegenerateGroup(usize),

    /// A rollout was produced by a policy with a different structure than
    /// the one now computing ratios for it.
    #[error("StaleRollout: rollout policy structure {rollout:#x} does not match current policy {current:#x}")]
    StaleRollout { rollout: u64, current: u64 },

    /// A likelihood or ratio stopped being a finite number.
    #[error("NonFiniteLikelihood: {0}")]
    NonFiniteLikelihood(String),

    /// Rewards or advantages were not assigned before they were needed.
    #[error("MissingRewards: {0}")]
    MissingRewards(String),
}

/// Hyperparameters of the group-sequence optimizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GspoConfig {
    /// Responses sampled per query.
    pub group_size: usize,
    /// Clip range half-width; ratios are clipped to `[1-clip, 1+clip]`.
    pub clip: f64,
    pub learning_rate: f64,
    /// Token cap per sampled response.
    pub max_length: usize,
    /// Optimization steps for [`train`].
    pub steps: usize,
    /// Master seed for sampling and task draws.
    pub seed: u64,
}

impl Default for GspoConfig {
    fn default() -> Self {
        Self {
            group_size: 8,
            clip: 0.2,
            learning_rate: 2.0,
            max_length: 12,
            steps: 2000,
            seed: 0,
        }
    }
}

impl GspoConfig {
    /// Checks every field is in range; the clip width must lie in (0, 1).
    pub fn validate(&self) -> Result<(), GspoError> {
        if self.group_size < 2 {
            return Err(GspoError::BadConfig(format!(
                "group_size must be at least 2, got {}",
                self.group_size
            )));
        }
        if !(self.clip > 0.0 && self.clip < 1.0) {
            return Err(GspoError::BadConfig(format!(
                "clip range half-width must lie in (0, 1), got {}",
                self.clip
            )));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(GspoError::BadConfig(format!(
                "learning_rate must be positive and finite, got {}",
                self.learning_rate
            )));
        }
        if self.max_length == 0 {
            return Err(GspoError::BadConfig("max_length must be positive".into()));
        }
        if self.steps == 0 {
            return Err(GspoError::BadConfig("steps must be positive".into()));
        }
        Ok(())
    }
}

/// A group of responses sampled for one query from a frozen policy.
#[derive(Debug, Clone)]
pub struct GroupRollout {
    pub query: Query,
    /// Sampled token sequences, including the end token when drawn.
    pub responses: Vec<Vec<TokenId>>,
    /// Rendered text of each response.
    pub texts: Vec<String>,
    /// Log-probability of each response under the sampling policy.
    pub logp_old: Vec<f64>,
    /// Scalar reward per response, set by [`GroupRollout::assign_rewards`].
    pub rewards: Vec<f64>,
    /// Group-centered advantages, set together with rewards.
    pub advantages: Vec<f64>,
    /// Ratios against the current policy, refreshed by
    /// [`GroupRollout::refresh_ratios`]; all 1 right after sampling.
    pub ratios: Vec<f64>,
    /// Structure fingerprint of the sampling policy.
    pub policy_fingerprint: u64,
}

/// Samples `group_size` responses for `query` from `params_old`.
///
/// Sampling is driven by a dedicated generator seeded with `seed`, so a
/// (policy, config, seed) triple always reproduces the same group.
pub fn sample_group(
    params_old: &PolicyParams,
    query: &Query,
    config: &GspoConfig,
    seed: u64,
) -> GroupRollout {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut responses = Vec::with_capacity(config.group_size);
    let mut texts = Vec::with_capacity(config.group_size);
    let mut logp_old = Vec::with_capacity(config.group_size);
    for _ in 0..config.group_size {
        let (tokens, logp) = params_old.sample_sequence(&mut rng, config.max_length);
        texts.push(params_old.render(&tokens));
        responses.push(tokens);
        logp_old.push(logp);
    }
    GroupRollout {
        query: query.clone(),
        ratios: vec![1.0; config.group_size],
        rewards: Vec::new(),
        advantages: Vec::new(),
        responses,
        texts,
        logp_old,
        policy_fingerprint: params_old.structure_fingerprint(),
    }
}

/// Group-relative advantages: each reward minus the group mean.
///
/// No standard-deviation normalization is applied, so the outputs keep the
/// scale of the rewards and always sum to zero.
pub fn advantages(rewards: &[f64]) -> Result<Vec<f64>, GspoError> {
    if rewards.len() < 2 {
        return Err(GspoError::DegenerateGroup(rewards.len()));
    }
    if rewards.iter().any(|r| !r.is_finite()) {
        return Err(GspoError::NonFiniteLikelihood(
            "rewards must be finite".into(),
        ));
    }
    let mean = rewards.iter().sum::<f64>() / rewards.len() as f64;
    Ok(rewards.iter().map(|r| r - mean).collect())
}

/// Sequence-level importance ratio: the per-token geometric mean of the
/// likelihood ratio, `exp((logp_new - logp_old) / length)`.
pub fn seq_ratio(logp_new: f64, logp_old: f64, length: usize) -> Result<f64, GspoError> {
    if length == 0 {
        return Err(GspoError::BadConfig(
            "sequence length must be positive".into(),
        ));
    }
    if !logp_new.is_finite() || !logp_old.is_finite() {
        return Err(GspoError::NonFiniteLikelihood(format!(
            "log-likelihoods must be finite, got new={logp_new} old={logp_old}"
        )));
    }
    let ratio = ((logp_new - logp_old) / length as f64).exp();
    if !ratio.is_finite() {
        return Err(GspoError::NonFiniteLikelihood(format!(
            "importance ratio overflowed for logp_new={logp_new} logp_old={logp_old}"
        )));
    }
    Ok(ratio)
}

impl GroupRollout {
    pub fn group_size(&self) -> usize {
        self.responses.len()
    }

    /// Stores scalar rewards and computes group-centered advantages.
    pub fn assign_rewards(&mut self, rewards: Vec<f64>) -> Result<(), GspoError> {
        if rewards.len() != self.group_size() {
            return Err(GspoError::MissingRewards(format!(
                "expected {} rewards, got {}",
                self.group_size(),
                rewards.len()
            )));
        }
        self.advantages = advantages(&rewards)?;
        self.rewards = rewards;
        Ok(())
    }

    /// Recomputes importance ratios of every response under `params`.
    ///
    /// Fails with [`GspoError::StaleRollout`] when `params` has a different
    /// structure (vocabulary or context order) than the sampling policy, in
    /// which case stored token ids would be meaningless.
    pub fn refresh_ratios(&mut self, params: &PolicyParams) -> Result<(), GspoError> {
        let current = params.structure_fingerprint();
        if current != self.policy_fingerprint {
            return Err(GspoError::StaleRollout {
                rollout: self.policy_fingerprint,
                current,
            });
        }
        let mut ratios = Vec::with_capacity(self.group_size());
        for (tokens, logp_old) in self.responses.iter().zip(&self.logp_old) {
            let logp_new = params.sequence_logp(tokens);
            ratios.push(seq_ratio(logp_new, *logp_old, tokens.len())?);
        }
        self.ratios = ratios;
        Ok(())
    }

    fn require_advantages(&self) -> Result<(), GspoError> {
        if self.advantages.len() != self.group_size() {
            return Err(GspoError::MissingRewards(
                "assign_rewards must run before the objective or gradient".into(),
            ));
        }
        Ok(())
    }
}

/// The clipped surrogate objective of one group, averaged over responses:
/// `mean_i min(r_i * A_i, clip(r_i, 1-eps, 1+eps) * A_i)`.
pub fn gspo_objective(rollout: &GroupRollout, config: &GspoConfig) -> Result<f64, GspoError> {
    rollout.require_advantages()?;
    let mut total = 0.0;
    for (ratio, advantage) in rollout.ratios.iter().zip(&rollout.advantages) {
        let clipped = ratio.clamp(1.0 - config.clip, 1.0 + config.clip);
        total += (ratio * advantage).min(clipped * advantage);
    }
    Ok(total / rollout.group_size() as f64)
}

/// Exact gradient of [`gspo_objective`] with respect to the policy logits.
///
/// A response contributes only when its unclipped term attains the `min`
/// (ties included); clipped-out responses contribute exactly zero. For an
/// active response the chain rule gives
/// `(A_i * r_i / |y_i|) * d logp_new / d logits`, accumulated over the group
/// and divided by the group size.
pub fn gspo_gradient(
    params: &PolicyParams,
    rollout: &GroupRollout,
    config: &GspoConfig,
) -> Result<PolicyGradient, GspoError> {
    rollout.require_advantages()?;
    let current = params.structure_fingerprint();
    if current != rollout.policy_fingerprint {
        return Err(GspoError::StaleRollout {
            rollout: rollout.policy_fingerprint,
            current,
        });
    }
    let group_size = rollout.group_size() as f64;
    let mut grad = PolicyGradient::default();
    for (i, tokens) in rollout.responses.iter().enumerate() {
        let advantage = rollout.advantages[i];
        if advantage == 0.0 {
            continue;
        }
        let logp_new = params.sequence_logp(tokens);
        let ratio = seq_ratio(logp_new, rollout.logp_old[i], tokens.len())?;
        let clipped = ratio.clamp(1.0 - config.clip, 1.0 + config.clip);
        if ratio * advantage > clipped * advantage {
            continue;
        }
        let scale = advantage * ratio / tokens.len() as f64 / group_size;
        params.grad_logp_into(tokens, scale, &mut grad);
    }
    Ok(grad)
}
