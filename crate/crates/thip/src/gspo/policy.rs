//! A toy autoregressive policy: an n-gram softmax over a small vocabulary.
//!
//! The policy holds one logit vector per observed context (the last
//! `context_order` tokens); contexts never touched default to all-zero
//! logits, a uniform distribution. Sampling is ancestral and stops at the
//! end-of-sequence token or a length cap. Log-probabilities and their exact
//! gradients with respect to the logits are available in closed form, which
//! keeps the trainer free of numerical differentiation.

use std::collections::BTreeMap;
use std::hash::{Hash, Hasher};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::GspoError;

/// Index into a policy's vocabulary.
pub type TokenId = usize;

/// Marker for the end of a sampled sequence.
pub const EOS_TOKEN: &str = "<eos>";

/// Accumulated gradient with respect to the policy logits, keyed by context.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PolicyGradient {
    entries: BTreeMap<Vec<TokenId>, Vec<f64>>,
}

impl PolicyGradient {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, context: &[TokenId]) -> Option<&[f64]> {
        self.entries.get(context).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<TokenId>, &Vec<f64>)> {
        self.entries.iter()
    }

    /// Largest absolute component.
    pub fn max_abs(&self) -> f64 {
        self.entries
            .values()
            .flat_map(|v| v.iter())
            .fold(0.0f64, |acc, x| acc.max(x.abs()))
    }

    /// Euclidean norm over all components.
    pub fn l2_norm(&self) -> f64 {
        self.entries
            .values()
            .flat_map(|v| v.iter())
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt()
    }

    pub(crate) fn accumulate(&mut self, context: &[TokenId], index: usize, value: f64, width: usize) {
        let entry = self
            .entries
            .entry(context.to_vec())
            .or_insert_with(|| vec![0.0; width]);
        entry[index] += value;
    }
}

fn serialize_logits<S>(
    logits: &BTreeMap<Vec<TokenId>, Vec<f64>>,
    serializer: S,
) -> Result<S::Ok, S::Error>
where
    S: serde::Serializer,
{
    let pairs: Vec<(&Vec<TokenId>, &Vec<f64>)> = logits.iter().collect();
    serde::Serialize::serialize(&pairs, serializer)
}

fn deserialize_logits<'de, D>(deserializer: D) -> Result<BTreeMap<Vec<TokenId>, Vec<f64>>, D::Error>
where
    D: serde::Deserializer<'de>,
{
    let pairs: Vec<(Vec<TokenId>, Vec<f64>)> = serde::Deserialize::deserialize(deserializer)?;
    Ok(pairs.into_iter().collect())
}

/// Parameters of the n-gram policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyParams {
    vocabulary: Vec<String>,
    context_order: usize,
    #[serde(serialize_with = "serialize_logits", deserialize_with = "deserialize_logits")]
    logits: BTreeMap<Vec<TokenId>, Vec<f64>>,
    eos: TokenId,
}

impl PolicyParams {
    /// Builds a uniform policy over `vocabulary`, which must contain
    /// distinct, non-blank tokens including [`EOS_TOKEN`].
    pub fn uniform(vocabulary: Vec<String>, context_order: usize) -> Result<Self, GspoError> {
        let mut seen = std::collections::BTreeSet::new();
        for token in &vocabulary {
            if token.trim().is_empty() {
                return Err(GspoError::BadPolicy("blank token in vocabulary".into()));
            }
            if !seen.insert(token.clone()) {
                return Err(GspoError::BadPolicy(format!(
                    "duplicate token {token:?} in vocabulary"
                )));
            }
        }
        let eos = vocabulary
            .iter()
            .position(|t| t == EOS_TOKEN)
            .ok_or_else(|| {
                GspoError::BadPolicy(format!("vocabulary must contain {EOS_TOKEN:?}"))
            })?;
        Ok(Self {
            vocabulary,
            context_order,
            logits: BTreeMap::new(),
            eos,
        })
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    pub fn vocab_size(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn context_order(&self) -> usize {
        self.context_order
    }

    pub fn eos_id(&self) -> TokenId {
        self.eos
    }

    pub fn token_id(&self, token: &str) -> Option<TokenId> {
        self.vocabulary.iter().position(|t| t == token)
    }

    pub fn token(&self, id: TokenId) -> &str {
        &self.vocabulary[id]
    }

    /// The conditioning context for the next step: the last
    /// `context_order` tokens of `prefix`.
    pub fn context_key(&self, prefix: &[TokenId]) -> Vec<TokenId> {
        let start = prefix.len().saturating_sub(self.context_order);
        prefix[start..].to_vec()
    }

    /// Logits for one context; untouched contexts are all zeros.
    pub fn logits_for(&self, context: &[TokenId]) -> Vec<f64> {
        self.logits
            .get(context)
            .cloned()
            .unwrap_or_else(|| vec![0.0; self.vocabulary.len()])
    }

    /// Overwrites the logits of one context. Values must be finite and match
    /// the vocabulary size.
    pub fn set_logits(&mut self, context: &[TokenId], values: Vec<f64>) -> Result<(), GspoError> {
        if values.len() != self.vocabulary.len() {
            return Err(GspoError::BadPolicy(format!(
                "logit vector has length {}, vocabulary has {}",
                values.len(),
                self.vocabulary.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(GspoError::BadPolicy(
                "logit values must be finite".into(),
            ));
        }
        self.logits.insert(context.to_vec(), values);
        Ok(())
    }

    /// Numerically stable log-softmax over one context's logits.
    pub fn log_softmax(&self, context: &[TokenId]) -> Vec<f64> {
        let logits = self.logits_for(context);
        let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let log_sum = max
            + logits
                .iter()
                .map(|l| (l - max).exp())
                .sum::<f64>()
                .ln();
        logits.into_iter().map(|l| l - log_sum).collect()
    }

    /// Log-probability of a full token sequence under the policy.
    pub fn sequence_logp(&self, tokens: &[TokenId]) -> f64 {
        let mut total = 0.0;
        for (i, token) in tokens.iter().enumerate() {
            let context = self.context_key(&tokens[..i]);
            total += self.log_softmax(&context)[*token];
        }
        total
    }

    /// Adds `scale * d log p(tokens) / d logits` into `grad`.
    ///
    /// For a softmax the per-step derivative with respect to the logit of
    /// vocabulary entry `v` in the step's context is `1[token = v] - p(v)`.
    pub fn grad_logp_into(&self, tokens: &[TokenId], scale: f64, grad: &mut PolicyGradient) {
        let width = self.vocabulary.len();
        for (i, token) in tokens.iter().enumerate() {
            let context = self.context_key(&tokens[..i]);
            let log_probs = self.log_softmax(&context);
            for v in 0..width {
                let indicator = if v == *token { 1.0 } else { 0.0 };
                let value = scale * (indicator - log_probs[v].exp());
                grad.accumulate(&context, v, value, width);
            }
        }
    }

    /// Samples one sequence by ancestral sampling.
    ///
    /// Stops after drawing the end-of-sequence token or after `max_length`
    /// tokens. The returned sequence includes the end token when drawn, is
    /// never empty for `max_length >= 1`, and comes with its log-probability.
    pub fn sample_sequence<R: Rng>(&self, rng: &mut R, max_length: usize) -> (Vec<TokenId>, f64) {
        let mut tokens: Vec<TokenId> = Vec::new();
        let mut logp = 0.0;
        while tokens.len() < max_length {
            let context = self.context_key(&tokens);
            let log_probs = self.log_softmax(&context);
            let draw: f64 = rng.gen();
            let mut cumulative = 0.0;
            let mut chosen = self.vocabulary.len() - 1;
            for (v, lp) in log_probs.iter().enumerate() {
                cumulative += lp.exp();
                if draw < cumulative {
                    chosen = v;
                    break;
                }
            }
            logp += log_probs[chosen];
            tokens.push(chosen);
            if chosen == self.eos {
                break;
            }
        }
        (tokens, logp)
    }

    /// Renders a token sequence as text, dropping the end-of-sequence token.
    pub fn render(&self, tokens: &[TokenId]) -> String {
        tokens
            .iter()
            .filter(|t| **t != self.eos)
            .map(|t| self.vocabulary[*t].as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Hash of the policy's structure (vocabulary and context order), stable
    /// across processes. Two policies with equal fingerprints index the same
    /// token sequences, so ratios between them are meaningful.
    pub fn structure_fingerprint(&self) -> u64 {
        let mut hasher = std::collections::hash_map::DefaultHasher::new();
        self.vocabulary.hash(&mut hasher);
        self.context_order.hash(&mut hasher);
        hasher.finish()
    }

    /// Gradient ascent step: adds `learning_rate * grad` to the logits.
    pub fn apply_gradient(&mut self, grad: &PolicyGradient, learning_rate: f64) {
        let width = self.vocabulary.len();
        for (context, values) in grad.iter() {
            let entry = self
                .logits
                .entry(context.clone())
                .or_insert_with(|| vec![0.0; width]);
            for (slot, value) in entry.iter_mut().zip(values) {
                *slot += learning_rate * value;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn vocab() -> Vec<String> {
        ["a", "b", EOS_TOKEN].map(String::from).to_vec()
    }

    fn policy() -> PolicyParams {
        PolicyParams::uniform(vocab(), 1).unwrap()
    }

    // --- construction ---

    #[test]
    fn vocabulary_must_contain_eos() {
        let err = PolicyParams::uniform(vec!["a".into()], 1).unwrap_err();
        assert!(matches!(err, GspoError::BadPolicy(_)));
    }

    #[test]
    fn vocabulary_rejects_duplicates() {
        let err =
            PolicyParams::uniform(vec!["a".into(), "a".into(), EOS_TOKEN.into()], 1).unwrap_err();
        assert!(matches!(err, GspoError::BadPolicy(_)));
    }

    #[test]
    fn set_logits_rejects_non_finite_values() {
        let mut p = policy();
        let err = p.set_logits(&[], vec![0.0, f64::NAN, 0.0]).unwrap_err();
        assert!(matches!(err, GspoError::BadPolicy(_)));
        let err = p.set_logits(&[], vec![0.0, 0.0]).unwrap_err();
        assert!(matches!(err, GspoError::BadPolicy(_)));
    }

    // --- distributions ---

    #[test]
    fn uniform_policy_has_equal_probabilities() {
        let p = policy();
        let log_probs = p.log_softmax(&[]);
        for lp in &log_probs {
            assert!((lp.exp() - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn log_softmax_normalizes() {
        let mut p = policy();
        p.set_logits(&[0], vec![2.0, -1.0, 0.5]).unwrap();
        let total: f64 = p.log_softmax(&[0]).iter().map(|lp| lp.exp()).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn log_softmax_survives_large_logits() {
        let mut p = policy();
        p.set_logits(&[], vec![1000.0, 999.0, 0.0]).unwrap();
        let log_probs = p.log_softmax(&[]);
        assert!(log_probs.iter().all(|lp| lp.is_finite()));
        let total: f64 = log_probs.iter().map(|lp| lp.exp()).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sequence_logp_sums_step_logps() {
        let p = policy();
        let eos = p.eos_id();
        let logp = p.sequence_logp(&[0, 1, eos]);
        assert!((logp - 3.0 * (1.0f64 / 3.0).ln()).abs() < 1e-12);
    }

    #[test]
    fn context_key_is_the_token_before_for_bigrams() {
        let p = policy();
        assert_eq!(p.context_key(&[]), Vec::<TokenId>::new());
        assert_eq!(p.context_key(&[0, 1]), vec![1]);
    }

    // --- sampling ---

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let p = policy();
        let mut rng1 = ChaCha8Rng::seed_from_u64(3);
        let mut rng2 = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(
            p.sample_sequence(&mut rng1, 10),
            p.sample_sequence(&mut rng2, 10)
        );
    }

    #[test]
    fn sampling_respects_max_length() {
        let mut p = policy();
        let no_eos = vec![10.0, 10.0, -30.0];
        p.set_logits(&[], no_eos.clone()).unwrap();
        p.set_logits(&[0], no_eos.clone()).unwrap();
        p.set_logits(&[1], no_eos).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (tokens, _) = p.sample_sequence(&mut rng, 4);
        assert_eq!(tokens.len(), 4);
    }

    #[test]
    fn sampled_logp_matches_sequence_logp() {
        let mut p = policy();
        p.set_logits(&[], vec![1.0, 0.0, -1.0]).unwrap();
        p.set_logits(&[0], vec![-0.5, 0.5, 1.5]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let (tokens, logp) = p.sample_sequence(&mut rng, 6);
            assert!((logp - p.sequence_logp(&tokens)).abs() < 1e-12);
        }
    }

    #[test]
    fn deterministic_policy_samples_its_mode() {
        let mut p = policy();
        p.set_logits(&[], vec![50.0, -50.0, -50.0]).unwrap();
        p.set_logits(&[0], vec![-50.0, 50.0, -50.0]).unwrap();
        p.set_logits(&[1], vec![-50.0, -50.0, 50.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (tokens, _) = p.sample_sequence(&mut rng, 10);
        assert_eq!(tokens, vec![0, 1, p.eos_id()]);
        assert_eq!(p.render(&tokens), "a b");
    }

    // --- gradient ---

    #[test]
    fn gradient_rows_sum_to_zero() {
        let mut p = policy();
        p.set_logits(&[], vec![0.3, -0.2, 0.1]).unwrap();
        let mut grad = PolicyGradient::default();
        p.grad_logp_into(&[0, 1, p.eos_id()], 1.0, &mut grad);
        for (_, row) in grad.iter() {
            let sum: f64 = row.iter().sum();
            assert!(sum.abs() < 1e-12, "softmax gradient rows must sum to 0");
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut p = policy();
        p.set_logits(&[], vec![0.4, -0.3, 0.2]).unwrap();
        p.set_logits(&[0], vec![-0.1, 0.6, 0.3]).unwrap();
        let tokens = vec![0, 1, p.eos_id()];
        let mut grad = PolicyGradient::default();
        p.grad_logp_into(&tokens, 1.0, &mut grad);

        let h = 1e-6;
        for context in [vec![], vec![0], vec![1]] {
            for v in 0..3 {
                let mut plus = p.clone();
                let mut logits = plus.logits_for(&context);
                logits[v] += h;
                plus.set_logits(&context, logits).unwrap();
                let mut minus = p.clone();
                let mut logits = minus.logits_for(&context);
                logits[v] -= h;
                minus.set_logits(&context, logits).unwrap();
                let numeric =
                    (plus.sequence_logp(&tokens) - minus.sequence_logp(&tokens)) / (2.0 * h);
                let analytic = grad.get(&context).map(|row| row[v]).unwrap_or(0.0);
                assert!(
                    (numeric - analytic).abs() < 1e-6,
                    "context {context:?} token {v}: numeric {numeric} vs analytic {analytic}"
                );
            }
        }
    }

    #[test]
    fn apply_gradient_moves_probability_toward_rewarded_tokens() {
        let mut p = policy();
        let tokens = vec![0, p.eos_id()];
        let before = p.sequence_logp(&tokens);
        let mut grad = PolicyGradient::default();
        p.grad_logp_into(&tokens, 1.0, &mut grad);
        p.apply_gradient(&grad, 0.5);
        assert!(p.sequence_logp(&tokens) > before);
    }

    // --- fingerprint and serialization ---

    #[test]
    fn fingerprint_tracks_structure_not_values() {
        let mut a = policy();
        let b = policy();
        assert_eq!(a.structure_fingerprint(), b.structure_fingerprint());
        a.set_logits(&[], vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(a.structure_fingerprint(), b.structure_fingerprint());
        let other =
            PolicyParams::uniform(vec!["z".into(), EOS_TOKEN.into()], 1).unwrap();
        assert_ne!(a.structure_fingerprint(), other.structure_fingerprint());
    }

    #[test]
    fn params_round_trip_through_json() {
        let mut p = policy();
        p.set_logits(&[1], vec![0.25, -0.5, 1.75]).unwrap();
        let text = serde_json::to_string(&p).unwrap();
        let back: PolicyParams = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p);
    }
}
