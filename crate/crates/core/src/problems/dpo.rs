//! Tabular softmax policies and the pairwise preference loss.
//!
//! A policy is a logit table over (prompt, response); π(y|x) is the softmax
//! of row x. The per-objective loss is the mean of −log σ(β·margin) over a
//! batch of preference pairs, where the margin is the policy's log-ratio
//! advantage of the chosen response over the rejected one, measured against
//! a frozen reference policy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::types::{GradientSet, LossVector};

/// Logit table defining softmax distributions over responses per prompt.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularPolicy {
    logits: Vec<f64>,
    num_prompts: usize,
    num_responses: usize,
}

impl TabularPolicy {
    /// Wrap a row-major logit table.
    pub fn new(num_prompts: usize, num_responses: usize, logits: Vec<f64>) -> Result<Self> {
        if num_prompts == 0 || num_responses < 2 {
            return Err(Error::InvalidConfig {
                reason: "policy needs at least one prompt and two responses".to_string(),
            });
        }
        if logits.len() != num_prompts * num_responses {
            return Err(Error::DimensionMismatch {
                context: "TabularPolicy logits",
                expected: num_prompts * num_responses,
                actual: logits.len(),
            });
        }
        if logits.iter().any(|l| !l.is_finite()) {
            return Err(Error::NonFinite {
                context: "TabularPolicy logits",
            });
        }
        Ok(TabularPolicy {
            logits,
            num_prompts,
            num_responses,
        })
    }

    /// I.i.d. standard-normal logits.
    pub fn standard_normal(num_prompts: usize, num_responses: usize, rng: &mut Rng) -> Self {
        let logits = (0..num_prompts * num_responses)
            .map(|_| rng.normal())
            .collect();
        TabularPolicy::new(num_prompts, num_responses, logits).expect("valid dimensions")
    }

    pub fn num_prompts(&self) -> usize {
        self.num_prompts
    }

    pub fn num_responses(&self) -> usize {
        self.num_responses
    }

    /// The flattened logit table.
    pub fn logits(&self) -> &[f64] {
        &self.logits
    }

    fn row(&self, prompt: usize) -> &[f64] {
        let start = prompt * self.num_responses;
        &self.logits[start..start + self.num_responses]
    }

    /// log π(response | prompt) = logit − logsumexp(row).
    pub fn log_prob(&self, prompt: usize, response: usize) -> f64 {
        let row = self.row(prompt);
        row[response] - log_sum_exp(row)
    }

    /// The softmax distribution over responses for one prompt.
    pub fn probabilities(&self, prompt: usize) -> Vec<f64> {
        let row = self.row(prompt);
        let lse = log_sum_exp(row);
        row.iter().map(|l| (l - lse).exp()).collect()
    }

    /// Same table space: equal prompt and response counts.
    fn same_space(&self, other: &TabularPolicy) -> Result<()> {
        if self.num_prompts != other.num_prompts || self.num_responses != other.num_responses {
            return Err(Error::DimensionMismatch {
                context: "policy vs reference index space",
                expected: self.num_prompts * self.num_responses,
                actual: other.num_prompts * other.num_responses,
            });
        }
        Ok(())
    }
}

fn log_sum_exp(row: &[f64]) -> f64 {
    let m = row.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    m + row.iter().map(|l| (l - m).exp()).sum::<f64>().ln()
}

/// ln(1 + e^z) without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Logistic sigmoid, stable on both tails.
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// One labelled comparison: for `prompt`, response `chosen` beat `rejected`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreferencePair {
    #[serde(rename = "x")]
    pub prompt: usize,
    #[serde(rename = "yw")]
    pub chosen: usize,
    #[serde(rename = "yl")]
    pub rejected: usize,
}

impl PreferencePair {
    pub fn new(prompt: usize, chosen: usize, rejected: usize) -> Result<Self> {
        if chosen == rejected {
            return Err(Error::InvalidConfig {
                reason: format!("preference pair for prompt {prompt} compares a response to itself"),
            });
        }
        Ok(PreferencePair {
            prompt,
            chosen,
            rejected,
        })
    }

    fn check_range(&self, policy: &TabularPolicy) -> Result<()> {
        if self.prompt >= policy.num_prompts()
            || self.chosen >= policy.num_responses()
            || self.rejected >= policy.num_responses()
        {
            return Err(Error::InvalidConfig {
                reason: format!(
                    "pair ({}, {}, {}) out of range for a {}x{} policy",
                    self.prompt,
                    self.chosen,
                    self.rejected,
                    policy.num_prompts(),
                    policy.num_responses()
                ),
            });
        }
        Ok(())
    }
}

/// All preference pairs for one objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreferenceDataset {
    pub objective: usize,
    pub pairs: Vec<PreferencePair>,
}

impl PreferenceDataset {
    pub fn new(objective: usize, pairs: Vec<PreferencePair>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::EmptyObjective { objective });
        }
        Ok(PreferenceDataset { objective, pairs })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("dataset serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let parsed: PreferenceDataset =
            serde_json::from_str(text).map_err(|e| Error::InvalidConfig {
                reason: format!("preference dataset JSON: {e}"),
            })?;
        for pair in &parsed.pairs {
            if pair.chosen == pair.rejected {
                return Err(Error::InvalidConfig {
                    reason: format!(
                        "pair for prompt {} compares a response to itself",
                        pair.prompt
                    ),
                });
            }
        }
        Ok(parsed)
    }
}

fn margin(
    policy: &TabularPolicy,
    reference: &TabularPolicy,
    pair: &PreferencePair,
) -> f64 {
    let chosen = policy.log_prob(pair.prompt, pair.chosen)
        - reference.log_prob(pair.prompt, pair.chosen);
    let rejected = policy.log_prob(pair.prompt, pair.rejected)
        - reference.log_prob(pair.prompt, pair.rejected);
    chosen - rejected
}

/// Mean of −log σ(β·margin) over the batch. Strictly positive.
pub fn dpo_loss(
    policy: &TabularPolicy,
    reference: &TabularPolicy,
    batch: &[PreferencePair],
    beta: f64,
) -> Result<f64> {
    policy.same_space(reference)?;
    if batch.is_empty() {
        return Err(Error::EmptyInput { context: "dpo_loss" });
    }
    if !beta.is_finite() || beta <= 0.0 {
        return Err(Error::InvalidConfig {
            reason: format!("beta must be positive, got {beta}"),
        });
    }
    let mut total = 0.0;
    for pair in batch {
        pair.check_range(policy)?;
        total += softplus(-beta * margin(policy, reference, pair));
    }
    Ok(total / batch.len() as f64)
}

/// Gradients of the per-objective losses with respect to every policy logit,
/// one batch per objective, with the batch losses bundled.
///
/// The margin only involves the chosen and rejected logits of the pair's
/// prompt (the softmax normaliser cancels between the two log-probs), so
/// each pair contributes ∓β·σ(−β·margin)/n to exactly those two entries.
pub fn dpo_grads(
    policy: &TabularPolicy,
    reference: &TabularPolicy,
    batches: &[Vec<PreferencePair>],
    beta: f64,
) -> Result<GradientSet> {
    if batches.is_empty() {
        return Err(Error::EmptyInput {
            context: "dpo_grads",
        });
    }
    let dim = policy.num_prompts() * policy.num_responses();
    let mut grads = Vec::with_capacity(batches.len());
    let mut losses = Vec::with_capacity(batches.len());
    for batch in batches {
        // Same traversal as dpo_loss so the bundled losses match it bitwise.
        losses.push(dpo_loss(policy, reference, batch, beta)?);
        let n = batch.len() as f64;
        let mut grad = vec![0.0; dim];
        for pair in batch {
            let push = -beta * sigmoid(-beta * margin(policy, reference, pair)) / n;
            grad[pair.prompt * policy.num_responses() + pair.chosen] += push;
            grad[pair.prompt * policy.num_responses() + pair.rejected] -= push;
        }
        grads.push(grad);
    }
    GradientSet::new(grads, LossVector::new(losses)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::l2_norm;

    fn uniform_policy(p: usize, r: usize) -> TabularPolicy {
        TabularPolicy::new(p, r, vec![0.0; p * r]).unwrap()
    }

    fn pair(x: usize, yw: usize, yl: usize) -> PreferencePair {
        PreferencePair::new(x, yw, yl).unwrap()
    }

    #[test]
    fn probabilities_sum_to_one() {
        let mut rng = Rng::new(7);
        let policy = TabularPolicy::standard_normal(5, 4, &mut rng);
        for x in 0..5 {
            let sum: f64 = policy.probabilities(x).iter().sum();
            assert!((sum - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn loss_at_reference_is_log_two() {
        let mut rng = Rng::new(8);
        let policy = TabularPolicy::standard_normal(6, 4, &mut rng);
        let batch = vec![pair(0, 1, 2), pair(3, 0, 3), pair(5, 2, 0)];
        for beta in [0.1, 0.5, 2.0] {
            let loss = dpo_loss(&policy, &policy, &batch, beta).unwrap();
            assert!((loss - std::f64::consts::LN_2).abs() <= 1e-12);
        }
    }

    #[test]
    fn loss_matches_direct_evaluation() {
        // 2 responses, policy logits (1,0), uniform reference: margin 1.
        let policy = TabularPolicy::new(1, 2, vec![1.0, 0.0]).unwrap();
        let reference = uniform_policy(1, 2);
        let batch = vec![pair(0, 0, 1)];
        let loss = dpo_loss(&policy, &reference, &batch, 0.5).unwrap();
        let expected = (1.0 + (-0.5_f64).exp()).ln();
        assert!((loss - expected).abs() <= 1e-15);
        assert!((loss - 0.4741).abs() < 1e-4);
    }

    #[test]
    fn loss_decreases_in_beta_for_positive_margin() {
        let policy = TabularPolicy::new(1, 2, vec![1.0, 0.0]).unwrap();
        let reference = uniform_policy(1, 2);
        let batch = vec![pair(0, 0, 1)];
        let a = dpo_loss(&policy, &reference, &batch, 0.5).unwrap();
        let b = dpo_loss(&policy, &reference, &batch, 1.0).unwrap();
        assert!(b < a);
    }

    #[test]
    fn loss_rejects_bad_inputs() {
        let policy = uniform_policy(2, 2);
        assert!(matches!(
            dpo_loss(&policy, &policy, &[], 0.5),
            Err(Error::EmptyInput { .. })
        ));
        assert!(dpo_loss(&policy, &policy, &[pair(0, 0, 1)], 0.0).is_err());
        assert!(dpo_loss(&policy, &policy, &[pair(7, 0, 1)], 0.5).is_err());
        assert!(PreferencePair::new(0, 1, 1).is_err());
    }

    #[test]
    fn gradient_signs_at_symmetric_start() {
        let policy = uniform_policy(2, 3);
        let gs = dpo_grads(&policy, &policy, &[vec![pair(0, 1, 2)]], 0.5).unwrap();
        let g = &gs.grads()[0];
        // chosen logit pushed up (negative gradient), rejected down, by β/2
        assert!((g[1] + 0.25).abs() < 1e-15);
        assert!((g[2] - 0.25).abs() < 1e-15);
        assert_eq!(g[0], 0.0);
        // prompt 1 untouched
        assert!(g[3..].iter().all(|x| *x == 0.0));
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = Rng::new(99);
        for _ in 0..50 {
            let (p, r) = (2 + rng.below(3), 2 + rng.below(3));
            let policy = TabularPolicy::standard_normal(p, r, &mut rng);
            let reference = TabularPolicy::standard_normal(p, r, &mut rng);
            let mut batch = Vec::new();
            for _ in 0..4 {
                let x = rng.below(p);
                let a = rng.below(r);
                let mut b = rng.below(r);
                while b == a {
                    b = rng.below(r);
                }
                batch.push(pair(x, a, b));
            }
            let beta = 0.5;
            let gs = dpo_grads(&policy, &reference, &[batch.clone()], beta).unwrap();
            let analytic = &gs.grads()[0];

            let mut fd = vec![0.0; p * r];
            let h = 1e-6;
            for i in 0..p * r {
                let mut plus = policy.logits().to_vec();
                plus[i] += h;
                let lp = dpo_loss(
                    &TabularPolicy::new(p, r, plus).unwrap(),
                    &reference,
                    &batch,
                    beta,
                )
                .unwrap();
                let mut minus = policy.logits().to_vec();
                minus[i] -= h;
                let lm = dpo_loss(
                    &TabularPolicy::new(p, r, minus).unwrap(),
                    &reference,
                    &batch,
                    beta,
                )
                .unwrap();
                fd[i] = (lp - lm) / (2.0 * h);
            }
            let diff: Vec<f64> = analytic.iter().zip(&fd).map(|(a, b)| a - b).collect();
            let rel = l2_norm(&diff) / l2_norm(analytic).max(1.0);
            assert!(rel < 1e-5, "rel err {rel}");
        }
    }

    #[test]
    fn duplicated_batch_gives_the_same_gradient() {
        let mut rng = Rng::new(5);
        let policy = TabularPolicy::standard_normal(3, 4, &mut rng);
        let reference = TabularPolicy::standard_normal(3, 4, &mut rng);
        let batch = vec![pair(0, 1, 0), pair(2, 3, 1)];
        let mut doubled = Vec::new();
        for p in &batch {
            doubled.push(*p);
            doubled.push(*p);
        }
        let a = dpo_grads(&policy, &reference, &[batch], 0.5).unwrap();
        let b = dpo_grads(&policy, &reference, &[doubled], 0.5).unwrap();
        for (x, y) in a.grads()[0].iter().zip(&b.grads()[0]) {
            assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn loss_invariant_under_per_prompt_logit_shift() {
        let mut rng = Rng::new(17);
        let policy = TabularPolicy::standard_normal(4, 3, &mut rng);
        let reference = TabularPolicy::standard_normal(4, 3, &mut rng);
        let batch = vec![pair(0, 0, 2), pair(1, 2, 1), pair(3, 1, 0)];
        let base = dpo_loss(&policy, &reference, &batch, 0.5).unwrap();
        for _ in 0..20 {
            let mut shifted = policy.logits().to_vec();
            for x in 0..4 {
                let c = rng.normal() * 10.0;
                for y in 0..3 {
                    shifted[x * 3 + y] += c;
                }
            }
            let shifted = TabularPolicy::new(4, 3, shifted).unwrap();
            let loss = dpo_loss(&shifted, &reference, &batch, 0.5).unwrap();
            assert!((loss - base).abs() <= 1e-9);
        }
    }

    #[test]
    fn dataset_json_round_trip() {
        let ds = PreferenceDataset::new(2, vec![pair(0, 1, 3), pair(5, 2, 0)]).unwrap();
        let json = ds.to_json();
        assert!(json.contains("\"objective\": 2"));
        assert!(json.contains("\"x\": 0"));
        assert!(json.contains("\"yw\": 1"));
        assert!(json.contains("\"yl\": 3"));
        let back = PreferenceDataset::from_json(&json).unwrap();
        assert_eq!(back, ds);
        assert!(PreferenceDataset::from_json("{\"objective\":0,\"pairs\":[{\"x\":0,\"yw\":1,\"yl\":1}]}").is_err());
    }
}
