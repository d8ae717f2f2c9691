//! Built-in benchmark problems: a two-parameter landscape with two losses
//! sharing one optimum, and a desk-scale tabular preference-optimisation
//! simulator over synthetic per-objective datasets.

mod dpo;
mod sim;
mod synthetic;
mod toy;

pub use dpo::{dpo_grads, dpo_loss, PreferenceDataset, PreferencePair, TabularPolicy};
pub use sim::DpoSimProblem;
pub use synthetic::{generate_preferences, minibatch_schedule, schedule_for_steps, score_tables};
pub use synthetic::SyntheticSpec;
pub use toy::{toy_grads, toy_losses, ToyProblem2D, TOY_INIT, TOY_OPTIMUM};
