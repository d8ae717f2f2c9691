//! Adam and the multi-objective training loop: per-objective gradients are
//! combined by the configured algorithm into one update vector, which drives
//! a single Adam step per iteration. Every step is recorded and convergence
//! against a known optimum is detected after each update.

use crate::combinators::{
    groupdro_update, mgda_decoupled_weights, mgda_normalised_weights, mgda_weights,
    uniform_weights, CombinatorKind, CombinatorOutput, Diagnostics, GroupDroState,
};
use crate::error::{Error, Result};
use crate::minnorm::SolverConfig;
use crate::types::{combined_direction, l2_norm, GradientSet, MultiObjectiveProblem};

/// Adam moment estimates and hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: usize,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    /// Fresh state with β₁ = 0.9, β₂ = 0.999, eps = 1e-8.
    pub fn new(dim: usize, lr: f64) -> Self {
        AdamState {
            m: vec![0.0; dim],
            v: vec![0.0; dim],
            t: 0,
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// One Adam update: moments decay toward the gradient, the step counter is
/// incremented before bias correction, and the parameters move by
/// −lr·m̂/(√v̂ + eps).
pub fn adam_step(state: &AdamState, params: &[f64], grad: &[f64]) -> Result<(AdamState, Vec<f64>)> {
    if params.len() != state.m.len() || grad.len() != state.m.len() {
        return Err(Error::DimensionMismatch {
            context: "adam_step: params/grad vs state",
            expected: state.m.len(),
            actual: params.len().max(grad.len()),
        });
    }
    if grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFinite {
            context: "adam_step: gradient",
        }
        .at_step(state.t + 1));
    }
    let mut next = state.clone();
    next.t += 1;
    let bc1 = 1.0 - next.beta1.powi(next.t as i32);
    let bc2 = 1.0 - next.beta2.powi(next.t as i32);
    let mut out = params.to_vec();
    for i in 0..grad.len() {
        next.m[i] = next.beta1 * next.m[i] + (1.0 - next.beta1) * grad[i];
        next.v[i] = next.beta2 * next.v[i] + (1.0 - next.beta2) * grad[i] * grad[i];
        let m_hat = next.m[i] / bc1;
        let v_hat = next.v[i] / bc2;
        out[i] -= next.lr * m_hat / (v_hat.sqrt() + next.eps);
    }
    Ok((next, out))
}

/// Learning-rate schedule over the configured step budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LrSchedule {
    Constant,
    /// Linear warmup over ceil(ratio·max_steps) steps, then cosine decay
    /// to zero across the remainder.
    CosineWarmup { warmup_ratio: f64 },
}

impl LrSchedule {
    fn lr_at(&self, base: f64, step: usize, total: usize) -> f64 {
        match self {
            LrSchedule::Constant => base,
            LrSchedule::CosineWarmup { warmup_ratio } => {
                let warmup = (warmup_ratio * total as f64).ceil() as usize;
                if step < warmup {
                    base * (step + 1) as f64 / warmup as f64
                } else if total <= warmup {
                    base
                } else {
                    let progress = (step - warmup) as f64 / (total - warmup) as f64;
                    base * 0.5 * (1.0 + (std::f64::consts::PI * progress).cos())
                }
            }
        }
    }
}

/// Full configuration of one training run.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub max_steps: usize,
    pub lr: f64,
    pub combinator: CombinatorKind,
    pub groupdro_eta: f64,
    pub solver: SolverConfig,
    /// Run stops once ‖θ − θ*‖₂ < convergence_tol, when the problem knows
    /// its optimum.
    pub convergence_tol: f64,
    pub record_every: usize,
    pub seed: u64,
    pub lr_schedule: LrSchedule,
}

impl TrainConfig {
    pub fn new(combinator: CombinatorKind) -> Self {
        TrainConfig {
            max_steps: 5000,
            lr: 5e-3,
            combinator,
            groupdro_eta: 0.01,
            solver: SolverConfig::default(),
            convergence_tol: 0.01,
            record_every: 1,
            seed: 0,
            lr_schedule: LrSchedule::Constant,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_steps == 0 {
            return Err(Error::InvalidConfig {
                reason: "max_steps must be at least 1".to_string(),
            });
        }
        if !self.lr.is_finite() || self.lr <= 0.0 {
            return Err(Error::InvalidConfig {
                reason: "lr must be positive".to_string(),
            });
        }
        if !self.convergence_tol.is_finite() || self.convergence_tol <= 0.0 {
            return Err(Error::InvalidConfig {
                reason: "convergence_tol must be positive".to_string(),
            });
        }
        if self.record_every == 0 {
            return Err(Error::InvalidConfig {
                reason: "record_every must be at least 1".to_string(),
            });
        }
        if !self.groupdro_eta.is_finite() || self.groupdro_eta < 0.0 {
            return Err(Error::InvalidConfig {
                reason: "groupdro_eta must be finite and nonnegative".to_string(),
            });
        }
        self.solver.validate()
    }
}

/// One recorded step of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub params: Vec<f64>,
    pub losses: Vec<f64>,
    pub applied_weights: Vec<f64>,
    pub grad_norms: Vec<f64>,
    pub direction_norm: f64,
}

/// The full story of one training run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub records: Vec<StepRecord>,
    /// Number of Adam updates after which ‖θ − θ*‖₂ < tol first held.
    pub converged_at: Option<usize>,
    pub final_params: Vec<f64>,
}

/// True iff ‖params − target‖₂ < tol (strict).
pub fn convergence_check(params: &[f64], target: &[f64], tol: f64) -> bool {
    assert_eq!(params.len(), target.len(), "convergence_check: dimensions");
    let dist_sq: f64 = params
        .iter()
        .zip(target)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    dist_sq.sqrt() < tol
}

/// Combinator dispatch with the per-run state it carries.
#[derive(Debug, Clone)]
struct Mixer {
    kind: CombinatorKind,
    groupdro: Option<GroupDroState>,
}

impl Mixer {
    fn new(kind: CombinatorKind, num_objectives: usize, eta: f64) -> Result<Self> {
        let groupdro = match kind {
            CombinatorKind::GroupDro => Some(GroupDroState::new(num_objectives, eta)?),
            _ => None,
        };
        Ok(Mixer { kind, groupdro })
    }

    fn step(&mut self, gs: &GradientSet, solver: &SolverConfig) -> Result<CombinatorOutput> {
        // A single objective leaves nothing to mix: every combinator
        // degenerates to weight (1), i.e. plain single-objective descent.
        if gs.count() == 1 {
            let mut out = uniform_weights(1)?;
            out.diagnostics = Diagnostics::from_gradient_set(gs);
            return Ok(out);
        }
        match self.kind {
            CombinatorKind::Uniform => {
                let mut out = uniform_weights(gs.count())?;
                out.diagnostics = Diagnostics::from_gradient_set(gs);
                Ok(out)
            }
            CombinatorKind::GroupDro => {
                // Weights absorb the current losses before the direction is
                // formed, so the very first step is already loss-sensitive.
                let state = self.groupdro.as_ref().expect("groupdro state");
                let next = groupdro_update(state, gs.losses())?;
                let weights = next.weights().clone();
                self.groupdro = Some(next);
                Ok(CombinatorOutput {
                    applied_weights: weights.clone(),
                    internal_weights: weights,
                    min_norm: None,
                    diagnostics: Diagnostics::from_gradient_set(gs),
                })
            }
            CombinatorKind::Mgda => mgda_weights(gs, solver),
            CombinatorKind::MgdaNormalised => mgda_normalised_weights(gs, solver),
            CombinatorKind::MgdaDecoupled => mgda_decoupled_weights(gs, solver),
        }
    }
}

/// Run the training loop.
///
/// Per step: evaluate the gradient set, compute combination weights, form
/// the combined direction on the raw gradients, take one Adam step, then
/// check convergence. The trajectory records the state at every
/// `record_every`-th step plus a terminal record at the final parameters;
/// `converged_at` counts Adam updates performed.
pub fn train(
    problem: &dyn MultiObjectiveProblem,
    init: &[f64],
    config: &TrainConfig,
) -> Result<Trajectory> {
    config.validate()?;
    if init.len() != problem.dim() {
        return Err(Error::DimensionMismatch {
            context: "train: init vs problem dim",
            expected: problem.dim(),
            actual: init.len(),
        });
    }

    let mut mixer = Mixer::new(config.combinator, problem.num_objectives(), config.groupdro_eta)?;
    let mut adam = AdamState::new(problem.dim(), config.lr);
    let mut params = init.to_vec();
    let mut records = Vec::new();
    let mut converged_at = None;

    for step in 0..config.max_steps {
        let gs = problem.gradients_at(step, &params);
        let out = mixer.step(&gs, &config.solver).map_err(|e| e.at_step(step))?;
        let direction =
            combined_direction(&out.applied_weights, &gs).map_err(|e| e.at_step(step))?;

        if step % config.record_every == 0 {
            records.push(record(step, &params, &gs, &out, &direction));
        }

        adam.lr = config.lr_schedule.lr_at(config.lr, step, config.max_steps);
        let (next_adam, next_params) =
            adam_step(&adam, &params, &direction).map_err(|e| e.at_step(step))?;
        adam = next_adam;
        params = next_params;

        if let Some(optimum) = problem.optimum() {
            if convergence_check(&params, optimum, config.convergence_tol) {
                converged_at = Some(step + 1);
                break;
            }
        }
    }

    // Terminal record at the final parameters. The combinator runs on a
    // clone so persistent state is not advanced past the last update.
    let final_step = converged_at.unwrap_or(config.max_steps);
    let gs = problem.gradients_at(final_step, &params);
    let out = mixer
        .clone()
        .step(&gs, &config.solver)
        .map_err(|e| e.at_step(final_step))?;
    let direction =
        combined_direction(&out.applied_weights, &gs).map_err(|e| e.at_step(final_step))?;
    records.push(record(final_step, &params, &gs, &out, &direction));

    Ok(Trajectory {
        records,
        converged_at,
        final_params: params,
    })
}

fn record(
    step: usize,
    params: &[f64],
    gs: &GradientSet,
    out: &CombinatorOutput,
    direction: &[f64],
) -> StepRecord {
    StepRecord {
        step,
        params: params.to_vec(),
        losses: gs.losses().values().to_vec(),
        applied_weights: out.applied_weights.values().to_vec(),
        grad_norms: gs.grad_norms(),
        direction_norm: l2_norm(direction),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{GradientSet, LossVector};

    /// k quadratic bowls (θ − cᵢ)² with analytic gradients.
    struct Bowls {
        centers: Vec<Vec<f64>>,
        optimum: Option<Vec<f64>>,
    }

    impl Bowls {
        fn single() -> Self {
            Bowls {
                centers: vec![vec![1.0, -2.0]],
                optimum: None,
            }
        }
    }

    impl MultiObjectiveProblem for Bowls {
        fn dim(&self) -> usize {
            self.centers[0].len()
        }

        fn num_objectives(&self) -> usize {
            self.centers.len()
        }

        fn evaluate(&self, params: &[f64]) -> LossVector {
            let values = self
                .centers
                .iter()
                .map(|c| {
                    params
                        .iter()
                        .zip(c)
                        .map(|(p, ci)| (p - ci) * (p - ci))
                        .sum()
                })
                .collect();
            LossVector::new(values).unwrap()
        }

        fn gradients(&self, params: &[f64]) -> GradientSet {
            let grads = self
                .centers
                .iter()
                .map(|c| params.iter().zip(c).map(|(p, ci)| 2.0 * (p - ci)).collect())
                .collect();
            GradientSet::new(grads, self.evaluate(params)).unwrap()
        }

        fn optimum(&self) -> Option<&[f64]> {
            self.optimum.as_deref()
        }
    }

    #[test]
    fn adam_zero_gradient_leaves_params_unchanged() {
        let state = AdamState::new(3, 5e-3);
        let params = vec![0.4, -1.0, 2.0];
        let (next, out) = adam_step(&state, &params, &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(out, params);
        assert_eq!(next.t, 1);
    }

    #[test]
    fn adam_first_step_matches_hand_evaluation() {
        // Fresh state, scalar gradient 2.0: bias correction makes the first
        // update -lr * g / (|g| + eps).
        let state = AdamState::new(1, 5e-3);
        let (_, out) = adam_step(&state, &[0.0], &[2.0]).unwrap();
        let expected = -5e-3 * 2.0 / (2.0 + 1e-8);
        assert!((out[0] - expected).abs() < 1e-15);
        assert!((out[0] + 5e-3).abs() < 1e-10);
    }

    #[test]
    fn adam_is_bitwise_deterministic() {
        let mut a = (AdamState::new(2, 1e-2), vec![1.0, 2.0]);
        let mut b = (AdamState::new(2, 1e-2), vec![1.0, 2.0]);
        for i in 0..50 {
            let g = vec![(i as f64).sin(), (i as f64).cos()];
            a = adam_step(&a.0, &a.1, &g).unwrap();
            b = adam_step(&b.0, &b.1, &g).unwrap();
        }
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
    }

    #[test]
    fn adam_rejects_non_finite_gradient() {
        let state = AdamState::new(1, 1e-2);
        let err = adam_step(&state, &[0.0], &[f64::NAN]).unwrap_err();
        assert!(err.to_string().contains("step 1"));
    }

    #[test]
    fn convergence_check_examples() {
        assert!(convergence_check(&[1.0, 2.0], &[1.0, 2.0], 1e-12));
        // boundary: distance exactly tol is not converged
        assert!(!convergence_check(&[1.01, 2.0], &[1.0, 2.0], 0.01));
        let d = ((0.8_f64).powi(2) + (-1.2_f64).powi(2)).sqrt();
        assert!((d - 1.442).abs() < 1e-3);
        assert!(!convergence_check(&[0.8, -0.2], &[0.0, 1.0], 0.01));
    }

    #[test]
    fn single_objective_is_identical_across_combinators() {
        let problem = Bowls::single();
        let init = vec![0.0, 0.0];
        let mut reference: Option<Trajectory> = None;
        for kind in CombinatorKind::ALL {
            let mut config = TrainConfig::new(kind);
            config.max_steps = 200;
            let traj = train(&problem, &init, &config).unwrap();
            assert_eq!(traj.records[0].applied_weights, vec![1.0]);
            match &reference {
                None => reference = Some(traj),
                Some(r) => assert_eq!(r, &traj, "combinator {kind} diverged"),
            }
        }
    }

    #[test]
    fn step_zero_losses_equal_evaluate_at_init() {
        let problem = Bowls {
            centers: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            optimum: None,
        };
        let init = vec![0.3, -0.7];
        let mut config = TrainConfig::new(CombinatorKind::Mgda);
        config.max_steps = 5;
        let traj = train(&problem, &init, &config).unwrap();
        assert_eq!(traj.records[0].step, 0);
        assert_eq!(traj.records[0].params, init);
        assert_eq!(
            traj.records[0].losses,
            problem.evaluate(&init).values().to_vec()
        );
    }

    #[test]
    fn train_is_deterministic() {
        let problem = Bowls {
            centers: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            optimum: None,
        };
        let config = {
            let mut c = TrainConfig::new(CombinatorKind::GroupDro);
            c.max_steps = 100;
            c.groupdro_eta = 0.3;
            c
        };
        let a = train(&problem, &[2.0, -2.0], &config).unwrap();
        let b = train(&problem, &[2.0, -2.0], &config).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn converged_at_record_satisfies_the_criterion() {
        let problem = Bowls {
            centers: vec![vec![0.5, 0.5], vec![0.5, 0.5]],
            optimum: Some(vec![0.5, 0.5]),
        };
        let mut config = TrainConfig::new(CombinatorKind::Uniform);
        config.max_steps = 5000;
        config.lr = 0.05;
        let traj = train(&problem, &[2.0, 2.0], &config).unwrap();
        let at = traj.converged_at.expect("should converge");
        let last = traj.records.last().unwrap();
        assert_eq!(last.step, at);
        assert!(convergence_check(&last.params, &[0.5, 0.5], config.convergence_tol));
        // steps strictly increasing
        for pair in traj.records.windows(2) {
            assert!(pair[0].step < pair[1].step);
        }
    }

    #[test]
    fn record_every_thins_the_trajectory() {
        let problem = Bowls::single();
        let mut config = TrainConfig::new(CombinatorKind::Uniform);
        config.max_steps = 10;
        config.record_every = 4;
        let traj = train(&problem, &[0.0, 0.0], &config).unwrap();
        let steps: Vec<usize> = traj.records.iter().map(|r| r.step).collect();
        assert_eq!(steps, vec![0, 4, 8, 10]);
    }

    #[test]
    fn cosine_schedule_warms_up_then_decays() {
        let s = LrSchedule::CosineWarmup { warmup_ratio: 0.1 };
        let total = 100;
        assert!((s.lr_at(1.0, 0, total) - 0.1).abs() < 1e-12);
        assert!((s.lr_at(1.0, 9, total) - 1.0).abs() < 1e-12);
        assert!(s.lr_at(1.0, 50, total) < 1.0);
        assert!(s.lr_at(1.0, 99, total) < 0.01);
    }
}
