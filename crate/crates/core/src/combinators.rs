//! The five mixing-coefficient algorithms. All of them map per-step loss and
//! gradient information to weights applied to the raw gradients; they differ
//! only in how the coefficients are computed.
//!
//! * `uniform`: fixed 1/k.
//! * `groupdro`: multiplicative exponential reweighting by current losses.
//! * `mgda`: min-norm weights over the raw gradients.
//! * `mgda-normalised`: min-norm weights over unit gradients, rescaled by
//!   1/‖∇ᵢ‖ before application.
//! * `mgda-decoupled`: min-norm weights over loss-normalised gradients
//!   ∇ᵢ/ℓᵢ, applied unchanged to the raw gradients.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::minnorm::{min_norm_point, MinNormSolution, SolverConfig};
use crate::types::{l2_norm, GradientSet, LossVector, MixWeights};

/// Objectives whose loss is at or below this are treated as converged by
/// `mgda-decoupled` and excluded from the min-norm problem.
pub const LOSS_FLOOR: f64 = 1e-12;

/// Gradients with norm at or below this cannot be normalised.
pub const NORM_FLOOR: f64 = 1e-12;

/// Selector for the five algorithms. The serialized names are the exact
/// strings accepted by the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CombinatorKind {
    #[serde(rename = "uniform")]
    Uniform,
    #[serde(rename = "groupdro")]
    GroupDro,
    #[serde(rename = "mgda")]
    Mgda,
    #[serde(rename = "mgda-normalised")]
    MgdaNormalised,
    #[serde(rename = "mgda-decoupled")]
    MgdaDecoupled,
}

impl CombinatorKind {
    pub const ALL: [CombinatorKind; 5] = [
        CombinatorKind::Uniform,
        CombinatorKind::GroupDro,
        CombinatorKind::Mgda,
        CombinatorKind::MgdaNormalised,
        CombinatorKind::MgdaDecoupled,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CombinatorKind::Uniform => "uniform",
            CombinatorKind::GroupDro => "groupdro",
            CombinatorKind::Mgda => "mgda",
            CombinatorKind::MgdaNormalised => "mgda-normalised",
            CombinatorKind::MgdaDecoupled => "mgda-decoupled",
        }
    }
}

impl std::fmt::Display for CombinatorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for CombinatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CombinatorKind::ALL
            .iter()
            .find(|k| k.name() == s)
            .copied()
            .ok_or_else(|| Error::InvalidConfig {
                reason: format!(
                    "unknown combinator `{s}`, expected one of: uniform, groupdro, mgda, \
                     mgda-normalised, mgda-decoupled"
                ),
            })
    }
}

/// Persistent exponentially-reweighted coefficients.
#[derive(Debug, Clone)]
pub struct GroupDroState {
    weights: MixWeights,
    eta: f64,
}

impl GroupDroState {
    /// Fresh state at uniform weights.
    pub fn new(num_objectives: usize, eta: f64) -> Result<Self> {
        Self::with_weights(MixWeights::uniform(num_objectives)?, eta)
    }

    pub fn with_weights(weights: MixWeights, eta: f64) -> Result<Self> {
        if !weights.on_simplex() {
            return Err(Error::InvalidWeights {
                reason: "groupdro weights must be on the simplex".to_string(),
            });
        }
        if !eta.is_finite() || eta < 0.0 {
            return Err(Error::InvalidConfig {
                reason: format!("groupdro eta must be finite and nonnegative, got {eta}"),
            });
        }
        Ok(GroupDroState { weights, eta })
    }

    pub fn weights(&self) -> &MixWeights {
        &self.weights
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }
}

/// Multiplicative update cᵢ ← cᵢ·e^{η·ℓᵢ} / Σⱼ cⱼ·e^{η·ℓⱼ}.
///
/// The exponentials are computed with the maximum loss subtracted; the
/// update is a ratio, so it is invariant under the shared shift, and the
/// shift keeps e^{η·ℓ} from overflowing for large losses.
pub fn groupdro_update(state: &GroupDroState, losses: &LossVector) -> Result<GroupDroState> {
    if losses.len() != state.weights.len() {
        return Err(Error::DimensionMismatch {
            context: "groupdro_update: losses vs weights",
            expected: state.weights.len(),
            actual: losses.len(),
        });
    }
    let max_loss = losses
        .values()
        .iter()
        .fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let mut next: Vec<f64> = state
        .weights
        .values()
        .iter()
        .zip(losses.values())
        .map(|(c, l)| c * (state.eta * (l - max_loss)).exp())
        .collect();
    let sum: f64 = next.iter().sum();
    if sum <= 0.0 {
        return Err(Error::InvalidWeights {
            reason: "groupdro update collapsed all weights to zero".to_string(),
        });
    }
    for c in next.iter_mut() {
        *c /= sum;
    }
    GroupDroState::with_weights(MixWeights::simplex(next)?, state.eta)
}

/// Per-objective scalar diagnostics carried alongside the weights.
#[derive(Debug, Clone, Default)]
pub struct Diagnostics {
    pub grad_norms: Vec<f64>,
    pub losses: Vec<f64>,
    /// Polyak step proxies ℓᵢ/‖∇ᵢ‖; +inf where the gradient vanishes.
    pub polyak: Vec<f64>,
}

impl Diagnostics {
    pub fn from_gradient_set(grads: &GradientSet) -> Self {
        let grad_norms = grads.grad_norms();
        let losses = grads.losses().values().to_vec();
        let polyak = grads
            .losses()
            .values()
            .iter()
            .zip(grads.grads())
            .map(|(l, g)| polyak_proxy(*l, g))
            .collect();
        Diagnostics {
            grad_norms,
            losses,
            polyak,
        }
    }
}

/// Result of one combinator invocation.
#[derive(Debug, Clone)]
pub struct CombinatorOutput {
    /// Coefficients multiplied onto the raw gradients.
    pub applied_weights: MixWeights,
    /// The simplex solution before any rescaling; equals `applied_weights`
    /// for everything except `mgda-normalised`.
    pub internal_weights: MixWeights,
    /// The internal min-norm solution, where one was solved. Its negated
    /// point is the common-descent certificate for the MGDA family.
    pub min_norm: Option<MinNormSolution>,
    pub diagnostics: Diagnostics,
}

/// Fixed scalarisation cᵢ = 1/k.
pub fn uniform_weights(k: usize) -> Result<CombinatorOutput> {
    let weights = MixWeights::uniform(k)?;
    Ok(CombinatorOutput {
        applied_weights: weights.clone(),
        internal_weights: weights,
        min_norm: None,
        diagnostics: Diagnostics::default(),
    })
}

/// Min-norm weights over the raw gradients.
pub fn mgda_weights(grads: &GradientSet, config: &SolverConfig) -> Result<CombinatorOutput> {
    let solution = min_norm_point(grads.grads(), config)?;
    Ok(CombinatorOutput {
        applied_weights: solution.weights.clone(),
        internal_weights: solution.weights.clone(),
        min_norm: Some(solution),
        diagnostics: Diagnostics::from_gradient_set(grads),
    })
}

/// Min-norm weights over unit gradients, applied as c′ᵢ/‖∇ᵢ‖.
///
/// The applied weights are deliberately not renormalised: the combined
/// update equals the convex combination Σ c′ᵢ·∇ᵢ/‖∇ᵢ‖ of unit gradients.
pub fn mgda_normalised_weights(
    grads: &GradientSet,
    config: &SolverConfig,
) -> Result<CombinatorOutput> {
    let norms = grads.grad_norms();
    if let Some(objective) = norms.iter().position(|n| *n <= NORM_FLOOR) {
        return Err(Error::ZeroGradient { objective });
    }
    let units: Vec<Vec<f64>> = grads
        .grads()
        .iter()
        .zip(&norms)
        .map(|(g, n)| g.iter().map(|x| x / n).collect())
        .collect();
    let solution = min_norm_point(&units, config)?;
    let applied: Vec<f64> = solution
        .weights
        .values()
        .iter()
        .zip(&norms)
        .map(|(c, n)| c / n)
        .collect();
    Ok(CombinatorOutput {
        applied_weights: MixWeights::nonnegative(applied)?,
        internal_weights: solution.weights.clone(),
        min_norm: Some(solution),
        diagnostics: Diagnostics::from_gradient_set(grads),
    })
}

/// Min-norm weights over loss-normalised gradients ∇ᵢ/ℓᵢ, applied to the
/// raw gradients.
///
/// Objectives whose loss is at or below [`LOSS_FLOOR`] are treated as
/// converged: they are excluded from the min-norm problem and receive
/// weight zero, with the remaining weights solved on the reduced set. If
/// every objective is at the floor the weights fall back to uniform.
pub fn mgda_decoupled_weights(
    grads: &GradientSet,
    config: &SolverConfig,
) -> Result<CombinatorOutput> {
    let k = grads.count();
    let active: Vec<usize> = (0..k)
        .filter(|i| grads.losses().values()[*i] > LOSS_FLOOR)
        .collect();
    if active.is_empty() {
        let weights = MixWeights::uniform(k)?;
        return Ok(CombinatorOutput {
            applied_weights: weights.clone(),
            internal_weights: weights,
            min_norm: None,
            diagnostics: Diagnostics::from_gradient_set(grads),
        });
    }
    let scaled: Vec<Vec<f64>> = active
        .iter()
        .map(|&i| {
            let loss = grads.losses().values()[i];
            grads.grads()[i].iter().map(|x| x / loss).collect()
        })
        .collect();
    let solution = min_norm_point(&scaled, config)?;
    let mut weights = vec![0.0; k];
    for (slot, w) in active.iter().zip(solution.weights.values()) {
        weights[*slot] = *w;
    }
    let weights = MixWeights::simplex(weights)?;
    Ok(CombinatorOutput {
        applied_weights: weights.clone(),
        internal_weights: weights,
        min_norm: Some(solution),
        diagnostics: Diagnostics::from_gradient_set(grads),
    })
}

/// First-order distance-to-optimum proxy ℓ/‖∇ℓ‖.
///
/// A vanished gradient reports +inf: the objective sits at a stationary
/// point and no finite step reaches its optimum along the gradient.
pub fn polyak_proxy(loss: f64, grad: &[f64]) -> f64 {
    let norm = l2_norm(grad);
    if norm == 0.0 {
        f64::INFINITY
    } else {
        loss / norm
    }
}
