//! The four subcommands.

use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use gradmix_core::combinators::CombinatorKind;
use gradmix_core::minnorm::{kkt_residual, min_norm_point, SolverConfig};
use gradmix_core::optimizer::{train, TrainConfig, Trajectory};
use gradmix_core::problems::{DpoSimProblem, PreferenceDataset, TabularPolicy, ToyProblem2D};
use gradmix_core::problems::TOY_INIT;
use gradmix_core::types::MultiObjectiveProblem;

use crate::config::{DpoSimConfig, ProblemKind, RunConfig};
use crate::csvio::trajectory_to_csv;
use crate::svg::fig3_svg;
use crate::CliError;

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| CliError::runtime(format!("cannot create {}: {e}", parent.display())))?;
        }
    }
    std::fs::write(path, contents)
        .map_err(|e| CliError::runtime(format!("cannot write {}: {e}", path.display())))
}

#[derive(Serialize)]
struct RunSummary {
    converged_at: Option<usize>,
    final_params: Vec<f64>,
    final_losses: Vec<f64>,
    wall_time: f64,
}

fn build_dpo_problem(cfg: &DpoSimConfig, train_cfg: &TrainConfig) -> Result<DpoSimProblem, CliError> {
    if cfg.dataset_files.is_empty() {
        DpoSimProblem::from_spec(&cfg.spec, cfg.beta, cfg.batch_size, train_cfg.max_steps)
            .map_err(|e| CliError::config(e.to_string()))
    } else {
        let mut datasets = Vec::new();
        for path in &cfg.dataset_files {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
            datasets.push(
                PreferenceDataset::from_json(&text)
                    .map_err(|e| CliError::config(e.to_string()))?,
            );
        }
        let mut policy_rng = cfg.spec.policy_stream();
        let reference = TabularPolicy::standard_normal(
            cfg.spec.num_prompts,
            cfg.spec.num_responses,
            &mut policy_rng,
        );
        DpoSimProblem::from_datasets(
            reference,
            datasets,
            cfg.beta,
            cfg.batch_size,
            train_cfg.max_steps,
            cfg.spec.seed,
        )
        .map_err(|e| CliError::config(e.to_string()))
    }
}

fn execute(
    problem: &dyn MultiObjectiveProblem,
    init: &[f64],
    config: &RunConfig,
) -> Result<(Trajectory, RunSummary), CliError> {
    let started = Instant::now();
    let trajectory =
        train(problem, init, &config.train).map_err(|e| CliError::runtime(e.to_string()))?;
    let wall_time = started.elapsed().as_secs_f64();
    let final_losses = problem.evaluate(&trajectory.final_params).values().to_vec();
    let summary = RunSummary {
        converged_at: trajectory.converged_at,
        final_params: trajectory.final_params.clone(),
        final_losses,
        wall_time,
    };
    Ok((trajectory, summary))
}

fn to_pretty_json<T: Serialize>(value: &T) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("summary serializes");
    out.push('\n');
    out
}

/// `run <config.json>`: one training run, trajectory CSV plus summary JSON.
pub fn cmd_run(config_path: &Path) -> Result<(), CliError> {
    let config = RunConfig::load(config_path)?;
    let (trajectory, summary) = match &config.problem {
        ProblemKind::Toy2d => execute(&ToyProblem2D, &TOY_INIT, &config)?,
        ProblemKind::DpoSim(dpo) => {
            let problem = build_dpo_problem(dpo, &config.train)?;
            let init = problem.initial_params();
            execute(&problem, &init, &config)?
        }
    };
    write_file(&config.output.trajectory_csv, &trajectory_to_csv(&trajectory))?;
    write_file(&config.output.summary_json, &to_pretty_json(&summary))?;
    match summary.converged_at {
        Some(n) => println!("{}: converged in {n} steps", config.train.combinator),
        None => println!(
            "{}: no convergence within {} steps",
            config.train.combinator, config.train.max_steps
        ),
    }
    Ok(())
}

/// `dpo-sim <config.json>`: a simulator run that also writes the final
/// per-objective losses and the serialized datasets it trained on.
pub fn cmd_dpo_sim(config_path: &Path) -> Result<(), CliError> {
    let config = RunConfig::load(config_path)?;
    let dpo = match &config.problem {
        ProblemKind::DpoSim(dpo) => dpo,
        ProblemKind::Toy2d => {
            return Err(CliError::config(
                "dpo-sim requires a config with problem kind `dpo-sim`".to_string(),
            ))
        }
    };
    let problem = build_dpo_problem(dpo, &config.train)?;
    let init = problem.initial_params();
    let initial_losses = problem.evaluate(&init).values().to_vec();
    let (trajectory, summary) = execute(&problem, &init, &config)?;

    write_file(&config.output.trajectory_csv, &trajectory_to_csv(&trajectory))?;
    write_file(&config.output.summary_json, &to_pretty_json(&summary))?;

    #[derive(Serialize)]
    struct FinalLosses<'a> {
        initial: &'a [f64],
        #[serde(rename = "final")]
        final_losses: &'a [f64],
        max_final: f64,
    }
    let max_final = summary
        .final_losses
        .iter()
        .fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    write_file(
        &config.output.dir.join("final_losses.json"),
        &to_pretty_json(&FinalLosses {
            initial: &initial_losses,
            final_losses: &summary.final_losses,
            max_final,
        }),
    )?;
    for dataset in problem.datasets() {
        let path = config
            .output
            .dir
            .join(format!("dataset_{}.json", dataset.objective));
        write_file(&path, &format!("{}\n", dataset.to_json()))?;
    }
    for (i, (before, after)) in initial_losses
        .iter()
        .zip(&summary.final_losses)
        .enumerate()
    {
        println!("objective {i}: loss {before:.6} -> {after:.6}");
    }
    println!("max final loss: {max_final:.6}");
    Ok(())
}

/// `solve`: min-norm weights for a vector list, as JSON on stdout.
pub fn cmd_solve(file: Option<&Path>, inline: Option<&str>) -> Result<(), CliError> {
    let text = match (file, inline) {
        (Some(path), None) => std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?,
        (None, Some(v)) => v.to_string(),
        _ => {
            return Err(CliError::config(
                "solve needs exactly one of --file or --vec".to_string(),
            ))
        }
    };
    let vectors: Vec<Vec<f64>> = serde_json::from_str(&text)
        .map_err(|e| CliError::config(format!("invalid vector list: {e}")))?;
    let solution = min_norm_point(&vectors, &SolverConfig::default())
        .map_err(|e| CliError::config(e.to_string()))?;

    #[derive(Serialize)]
    struct SolveOutput<'a> {
        weights: &'a [f64],
        point: &'a [f64],
        norm: f64,
        iterations: usize,
        converged: bool,
        kkt_residual: f64,
    }
    let out = SolveOutput {
        weights: solution.weights.values(),
        point: &solution.point,
        norm: solution.norm,
        iterations: solution.iterations,
        converged: solution.converged,
        kkt_residual: kkt_residual(&vectors, &solution),
    };
    println!("{}", serde_json::to_string_pretty(&out).expect("solution serializes"));
    Ok(())
}

const FIG3_COLORS: [(&str, CombinatorKind); 5] = [
    ("#9467bd", CombinatorKind::MgdaDecoupled),
    ("#d62728", CombinatorKind::MgdaNormalised),
    ("#2ca02c", CombinatorKind::GroupDro),
    ("#1f77b4", CombinatorKind::Uniform),
    ("#ff7f0e", CombinatorKind::Mgda),
];

#[derive(Serialize)]
struct Fig3Entry {
    combinator: String,
    converged_at: Option<usize>,
    final_params: Vec<f64>,
    final_losses: Vec<f64>,
}

/// `reproduce-fig3`: all five combinators on the 2D benchmark with the
/// stock settings; per-run CSVs, an overlay SVG, and a step-count summary.
pub fn cmd_reproduce_fig3(out_dir: &Path, max_steps: usize) -> Result<(), CliError> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::runtime(format!("cannot create {}: {e}", out_dir.display())))?;

    let mut runs: Vec<(CombinatorKind, Trajectory)> = Vec::new();
    for (_, kind) in FIG3_COLORS {
        let mut config = TrainConfig::new(kind);
        config.max_steps = max_steps;
        let trajectory = train(&ToyProblem2D, &TOY_INIT, &config)
            .map_err(|e| CliError::runtime(e.to_string()))?;
        runs.push((kind, trajectory));
    }

    let mut entries = Vec::new();
    let mut table = format!("{:<18} {:>10}\n", "combinator", "steps");
    for (kind, trajectory) in &runs {
        write_file(
            &out_dir.join(format!("{}.csv", kind.name())),
            &trajectory_to_csv(trajectory),
        )?;
        let final_losses = ToyProblem2D
            .evaluate(&trajectory.final_params)
            .values()
            .to_vec();
        entries.push(Fig3Entry {
            combinator: kind.name().to_string(),
            converged_at: trajectory.converged_at,
            final_params: trajectory.final_params.clone(),
            final_losses,
        });
        let steps = match trajectory.converged_at {
            Some(n) => n.to_string(),
            None => "none".to_string(),
        };
        table.push_str(&format!("{:<18} {:>10}\n", kind.name(), steps));
    }

    let svg_runs: Vec<(&str, &str, &Trajectory)> = FIG3_COLORS
        .iter()
        .zip(&runs)
        .map(|((color, kind), (_, trajectory))| (kind.name(), *color, trajectory))
        .collect();
    write_file(&out_dir.join("trajectories.svg"), &fig3_svg(&svg_runs))?;
    write_file(&out_dir.join("summary.json"), &to_pretty_json(&entries))?;
    write_file(&out_dir.join("summary.txt"), &table)?;
    print!("{table}");
    Ok(())
}
