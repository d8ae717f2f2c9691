//! Run-configuration JSON: strict schema (unknown keys rejected) with
//! per-problem defaults resolved after parsing.
//!
//! `toy2d` defaults to the benchmark settings (lr 5e-3, groupdro eta 0.01,
//! tolerance 0.01, 5000 steps); `dpo-sim` defaults to beta 0.5, groupdro
//! eta 0.1, and the stock solver budget (20 iterations, 1e-8 gap).

use std::path::{Path, PathBuf};

use serde::Deserialize;

use gradmix_core::combinators::CombinatorKind;
use gradmix_core::minnorm::SolverConfig;
use gradmix_core::optimizer::{LrSchedule, TrainConfig};
use gradmix_core::problems::SyntheticSpec;

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunConfigFile {
    problem: ProblemConfigFile,
    combinator: CombinatorKind,
    max_steps: Option<usize>,
    lr: Option<f64>,
    groupdro_eta: Option<f64>,
    solver: Option<SolverConfigFile>,
    convergence_tol: Option<f64>,
    record_every: Option<usize>,
    seed: Option<u64>,
    output: Option<OutputConfigFile>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemConfigFile {
    kind: String,
    num_prompts: Option<usize>,
    num_responses: Option<usize>,
    num_objectives: Option<usize>,
    conflict: Option<f64>,
    beta: Option<f64>,
    batch_size: Option<usize>,
    /// Paths to preference-dataset JSON files, one per objective; overrides
    /// synthetic generation.
    dataset_files: Option<Vec<PathBuf>>,
    /// Cosine learning-rate annealing with linear warmup.
    cosine_schedule: Option<bool>,
    warmup_ratio: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolverConfigFile {
    max_iterations: Option<usize>,
    convergence_threshold: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputConfigFile {
    dir: Option<PathBuf>,
    trajectory_csv: Option<PathBuf>,
    summary_json: Option<PathBuf>,
}

/// A fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub problem: ProblemKind,
    pub train: TrainConfig,
    pub output: OutputPaths,
}

#[derive(Debug, Clone)]
pub enum ProblemKind {
    Toy2d,
    DpoSim(DpoSimConfig),
}

#[derive(Debug, Clone)]
pub struct DpoSimConfig {
    pub spec: SyntheticSpec,
    pub beta: f64,
    pub batch_size: usize,
    pub dataset_files: Vec<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct OutputPaths {
    pub dir: PathBuf,
    pub trajectory_csv: PathBuf,
    pub summary_json: PathBuf,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let file: RunConfigFile = serde_json::from_str(text)
            .map_err(|e| CliError::config(format!("invalid config: {e}")))?;
        Self::resolve(file)
    }

    fn resolve(file: RunConfigFile) -> Result<Self, CliError> {
        let p = &file.problem;
        let problem = match p.kind.as_str() {
            "toy2d" => {
                let extras = [
                    ("num_prompts", p.num_prompts.is_some()),
                    ("num_responses", p.num_responses.is_some()),
                    ("num_objectives", p.num_objectives.is_some()),
                    ("conflict", p.conflict.is_some()),
                    ("beta", p.beta.is_some()),
                    ("batch_size", p.batch_size.is_some()),
                    ("dataset_files", p.dataset_files.is_some()),
                    ("cosine_schedule", p.cosine_schedule.is_some()),
                    ("warmup_ratio", p.warmup_ratio.is_some()),
                ];
                if let Some((name, _)) = extras.iter().find(|(_, set)| *set) {
                    return Err(CliError::config(format!(
                        "problem `toy2d` does not take the `{name}` field"
                    )));
                }
                ProblemKind::Toy2d
            }
            "dpo-sim" => {
                let spec = SyntheticSpec {
                    num_prompts: p.num_prompts.unwrap_or(32),
                    num_responses: p.num_responses.unwrap_or(4),
                    num_objectives: p.num_objectives.unwrap_or(4),
                    conflict: p.conflict.unwrap_or(0.3),
                    seed: file.seed.unwrap_or(0),
                };
                spec.validate()
                    .map_err(|e| CliError::config(e.to_string()))?;
                ProblemKind::DpoSim(DpoSimConfig {
                    spec,
                    beta: p.beta.unwrap_or(0.5),
                    batch_size: p.batch_size.unwrap_or(8),
                    dataset_files: p.dataset_files.clone().unwrap_or_default(),
                })
            }
            other => {
                return Err(CliError::config(format!(
                    "unknown problem kind `{other}`, expected `toy2d` or `dpo-sim`"
                )))
            }
        };

        let toy = matches!(problem, ProblemKind::Toy2d);
        let solver = {
            let s = file.solver.as_ref();
            SolverConfig {
                max_iterations: s.and_then(|s| s.max_iterations).unwrap_or(20),
                convergence_threshold: s.and_then(|s| s.convergence_threshold).unwrap_or(1e-8),
            }
        };
        let lr_schedule = if p.cosine_schedule.unwrap_or(false) {
            LrSchedule::CosineWarmup {
                warmup_ratio: p.warmup_ratio.unwrap_or(0.03),
            }
        } else {
            LrSchedule::Constant
        };
        let train = TrainConfig {
            max_steps: file.max_steps.unwrap_or(if toy { 5000 } else { 200 }),
            lr: file.lr.unwrap_or(if toy { 5e-3 } else { 1e-2 }),
            combinator: file.combinator,
            groupdro_eta: file.groupdro_eta.unwrap_or(if toy { 0.01 } else { 0.1 }),
            solver,
            convergence_tol: file.convergence_tol.unwrap_or(0.01),
            record_every: file.record_every.unwrap_or(1),
            seed: file.seed.unwrap_or(0),
            lr_schedule,
        };
        train
            .validate()
            .map_err(|e| CliError::config(e.to_string()))?;

        let out = file.output.as_ref();
        let dir = out
            .and_then(|o| o.dir.clone())
            .unwrap_or_else(|| PathBuf::from("."));
        let output = OutputPaths {
            trajectory_csv: out
                .and_then(|o| o.trajectory_csv.clone())
                .unwrap_or_else(|| dir.join("trajectory.csv")),
            summary_json: out
                .and_then(|o| o.summary_json.clone())
                .unwrap_or_else(|| dir.join("summary.json")),
            dir,
        };

        Ok(RunConfig {
            problem,
            train,
            output,
        })
    }
}
