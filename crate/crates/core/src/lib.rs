//! Multi-objective gradient combination: five coefficient algorithms over a
//! Frank-Wolfe min-norm solver, an Adam training loop, and built-in
//! benchmark problems (a 2D toy landscape and a tabular preference-pair
//! simulator).

pub mod combinators;
pub mod error;
pub mod minnorm;
pub mod optimizer;
pub mod problems;
pub mod rng;
pub mod types;

pub use combinators::{CombinatorKind, CombinatorOutput, Diagnostics, GroupDroState};
pub use error::{Error, Result};
pub use minnorm::{gram_matrix, kkt_residual, min_norm_pair, min_norm_point};
pub use minnorm::{MinNormSolution, SolverConfig};
pub use optimizer::{adam_step, convergence_check, train};
pub use optimizer::{AdamState, LrSchedule, StepRecord, TrainConfig, Trajectory};
pub use problems::{DpoSimProblem, SyntheticSpec, TabularPolicy, ToyProblem2D};
pub use types::{combined_direction, dot, l2_norm};
pub use types::{GradientSet, LossVector, MixWeights, MultiObjectiveProblem};
