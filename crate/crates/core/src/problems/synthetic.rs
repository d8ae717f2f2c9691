//! Synthetic per-objective preference data.
//!
//! Each (prompt, response) gets one integer score in 1..=5 per objective.
//! Scores come from a shared standard-normal latent mixed with per-objective
//! noise so a conflict parameter ρ controls how much the objectives agree:
//!
//!   rawᵢ = sᵢ·√|ρ|·z + √(1−|ρ|)·eᵢ,   score = clamp(3 + round(1.5·rawᵢ), 1, 5)
//!
//! with sᵢ = 1 for ρ ≥ 0, and alternating ±1 across objectives for ρ < 0
//! (so ρ = −1 with two objectives reverses the rankings exactly). Preference
//! pairs enumerate all unordered response pairs per prompt and keep those
//! whose scores differ, oriented toward the higher score. Everything is a
//! pure function of the instance seed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::dpo::{PreferenceDataset, PreferencePair};
use crate::rng::Rng;

// Sub-stream tags, one purpose each, all derived from the single seed.
const STREAM_LATENT: u64 = 0x01;
const STREAM_POLICY: u64 = 0x02;
const STREAM_NOISE: u64 = 0x1000;
const STREAM_SCHEDULE: u64 = 0x2000;

/// Shape, conflict level, and seed of a synthetic instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub num_prompts: usize,
    pub num_responses: usize,
    pub num_objectives: usize,
    /// Correlation ρ ∈ [−1, 1] between objective score tables.
    pub conflict: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.num_prompts == 0 || self.num_responses < 2 || self.num_objectives == 0 {
            return Err(Error::InvalidConfig {
                reason: "synthetic spec needs prompts, at least two responses, and objectives"
                    .to_string(),
            });
        }
        if !self.conflict.is_finite() || !(-1.0..=1.0).contains(&self.conflict) {
            return Err(Error::InvalidConfig {
                reason: format!("conflict must lie in [-1, 1], got {}", self.conflict),
            });
        }
        Ok(())
    }

    /// The generator for a named sub-stream of this spec's seed.
    pub(crate) fn stream(&self, tag: u64) -> Rng {
        Rng::new(self.seed).derive(tag)
    }

    /// Seeded standard-normal policy logits; the frozen reference is a copy.
    pub fn policy_stream(&self) -> Rng {
        self.stream(STREAM_POLICY)
    }
}

/// Per-objective integer score tables, scores[objective][prompt][response].
pub fn score_tables(spec: &SyntheticSpec) -> Result<Vec<Vec<Vec<i32>>>> {
    spec.validate()?;
    let (p, r, k) = (spec.num_prompts, spec.num_responses, spec.num_objectives);
    let mut latent_rng = spec.stream(STREAM_LATENT);
    let latent: Vec<f64> = (0..p * r).map(|_| latent_rng.normal()).collect();
    let rho = spec.conflict;
    let shared = rho.abs().sqrt();
    let noise = (1.0 - rho.abs()).sqrt();

    let mut tables = Vec::with_capacity(k);
    for objective in 0..k {
        let sign = if rho >= 0.0 || objective % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        let mut noise_rng = spec.stream(STREAM_NOISE + objective as u64);
        let mut table = vec![vec![0_i32; r]; p];
        for x in 0..p {
            for y in 0..r {
                let raw = sign * shared * latent[x * r + y] + noise * noise_rng.normal();
                let score = 3 + (1.5 * raw).round() as i32;
                table[x][y] = score.clamp(1, 5);
            }
        }
        tables.push(table);
    }
    Ok(tables)
}

/// One preference dataset per objective.
///
/// For every prompt, all unordered response pairs whose scores differ under
/// that objective are kept, chosen = the higher-scored response. An
/// objective whose table yields no pairs at all is an error naming it.
pub fn generate_preferences(spec: &SyntheticSpec) -> Result<Vec<PreferenceDataset>> {
    let tables = score_tables(spec)?;
    let mut datasets = Vec::with_capacity(tables.len());
    for (objective, table) in tables.iter().enumerate() {
        let mut pairs = Vec::new();
        for (x, row) in table.iter().enumerate() {
            for a in 0..row.len() {
                for b in a + 1..row.len() {
                    if row[a] == row[b] {
                        continue;
                    }
                    let (chosen, rejected) = if row[a] > row[b] { (a, b) } else { (b, a) };
                    pairs.push(PreferencePair::new(x, chosen, rejected)?);
                }
            }
        }
        if pairs.is_empty() {
            return Err(Error::EmptyObjective { objective });
        }
        datasets.push(PreferenceDataset::new(objective, pairs)?);
    }
    Ok(datasets)
}

/// One epoch of per-step batches, one batch per objective per step.
///
/// The number of steps is ceil(max dataset size / batch size); smaller
/// datasets are oversampled by cycling a seeded shuffle that reshuffles on
/// every wrap, so each step yields a full batch for every objective.
pub fn minibatch_schedule(
    datasets: &[PreferenceDataset],
    batch_size: usize,
    seed: u64,
) -> Result<Vec<Vec<Vec<PreferencePair>>>> {
    let largest = datasets.iter().map(|d| d.len()).max().unwrap_or(0);
    let steps = largest.div_ceil(batch_size.max(1));
    schedule_for_steps(datasets, batch_size, seed, steps)
}

/// Like [`minibatch_schedule`] with an explicit number of steps.
pub fn schedule_for_steps(
    datasets: &[PreferenceDataset],
    batch_size: usize,
    seed: u64,
    steps: usize,
) -> Result<Vec<Vec<Vec<PreferencePair>>>> {
    if datasets.is_empty() {
        return Err(Error::EmptyInput {
            context: "minibatch_schedule",
        });
    }
    if batch_size == 0 {
        return Err(Error::InvalidConfig {
            reason: "batch_size must be at least 1".to_string(),
        });
    }
    for d in datasets {
        if d.is_empty() {
            return Err(Error::EmptyObjective {
                objective: d.objective,
            });
        }
    }

    let mut streams: Vec<CycleStream> = datasets
        .iter()
        .enumerate()
        .map(|(i, d)| {
            CycleStream::new(
                d.len(),
                Rng::new(seed).derive(STREAM_SCHEDULE + i as u64),
            )
        })
        .collect();

    let mut schedule = Vec::with_capacity(steps);
    for _ in 0..steps {
        let mut per_objective = Vec::with_capacity(datasets.len());
        for (dataset, stream) in datasets.iter().zip(streams.iter_mut()) {
            let batch = (0..batch_size)
                .map(|_| dataset.pairs[stream.next_index()])
                .collect();
            per_objective.push(batch);
        }
        schedule.push(per_objective);
    }
    Ok(schedule)
}

/// Endless pass over 0..n in seeded shuffled order, reshuffled on wrap.
struct CycleStream {
    order: Vec<usize>,
    pos: usize,
    rng: Rng,
}

impl CycleStream {
    fn new(n: usize, mut rng: Rng) -> Self {
        let mut order: Vec<usize> = (0..n).collect();
        rng.shuffle(&mut order);
        CycleStream { order, pos: 0, rng }
    }

    fn next_index(&mut self) -> usize {
        if self.pos == self.order.len() {
            self.rng.shuffle(&mut self.order);
            self.pos = 0;
        }
        let idx = self.order[self.pos];
        self.pos += 1;
        idx
    }
}
