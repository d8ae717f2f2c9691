//! Shared numeric records: per-objective losses, gradient bundles, mixing
//! weights, and the problem interface every solver and combinator consumes.

use crate::error::{Error, Result};

/// Tolerance on the simplex sum constraint for [`MixWeights`].
pub const SIMPLEX_TOL: f64 = 1e-9;

/// Euclidean norm of a vector.
pub fn l2_norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Inner product. Panics on length mismatch (internal misuse, not user input).
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "dot: length mismatch");
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// One loss value per objective.
#[derive(Debug, Clone, PartialEq)]
pub struct LossVector {
    values: Vec<f64>,
}

impl LossVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput {
                context: "LossVector",
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "LossVector",
            });
        }
        Ok(LossVector { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Per-objective gradients of shared dimension, bundled with the losses
/// evaluated at the same point. Combinators that weigh gradients by their
/// losses need both from one consistent snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSet {
    grads: Vec<Vec<f64>>,
    losses: LossVector,
}

impl GradientSet {
    pub fn new(grads: Vec<Vec<f64>>, losses: LossVector) -> Result<Self> {
        if grads.is_empty() {
            return Err(Error::EmptyInput {
                context: "GradientSet",
            });
        }
        if grads.len() != losses.len() {
            return Err(Error::DimensionMismatch {
                context: "GradientSet: gradients vs losses",
                expected: losses.len(),
                actual: grads.len(),
            });
        }
        let dim = grads[0].len();
        for g in &grads {
            if g.len() != dim {
                return Err(Error::DimensionMismatch {
                    context: "GradientSet: gradient dimensions",
                    expected: dim,
                    actual: g.len(),
                });
            }
            if g.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite {
                    context: "GradientSet",
                });
            }
        }
        Ok(GradientSet { grads, losses })
    }

    /// Number of objectives.
    pub fn count(&self) -> usize {
        self.grads.len()
    }

    /// Parameter dimension.
    pub fn dim(&self) -> usize {
        self.grads[0].len()
    }

    pub fn grads(&self) -> &[Vec<f64>] {
        &self.grads
    }

    pub fn losses(&self) -> &LossVector {
        &self.losses
    }

    /// Euclidean norm of each per-objective gradient.
    pub fn grad_norms(&self) -> Vec<f64> {
        self.grads.iter().map(|g| l2_norm(g)).collect()
    }
}

/// Combination coefficients, one per objective. The `simplex` flag records
/// whether they are constrained to sum to one; rescaled coefficients (e.g.
/// divided by gradient norms) drop the flag.
#[derive(Debug, Clone, PartialEq)]
pub struct MixWeights {
    weights: Vec<f64>,
    simplex: bool,
}

impl MixWeights {
    /// Weights constrained to the probability simplex.
    pub fn simplex(weights: Vec<f64>) -> Result<Self> {
        Self::check_nonnegative(&weights)?;
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::InvalidWeights {
                reason: format!("simplex weights sum to {sum}, expected 1"),
            });
        }
        Ok(MixWeights {
            weights,
            simplex: true,
        })
    }

    /// Nonnegative weights without the sum constraint.
    pub fn nonnegative(weights: Vec<f64>) -> Result<Self> {
        Self::check_nonnegative(&weights)?;
        Ok(MixWeights {
            weights,
            simplex: false,
        })
    }

    /// Uniform simplex weights 1/k.
    pub fn uniform(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::EmptyInput {
                context: "MixWeights::uniform",
            });
        }
        Ok(MixWeights {
            weights: vec![1.0 / k as f64; k],
            simplex: true,
        })
    }

    fn check_nonnegative(weights: &[f64]) -> Result<()> {
        if weights.is_empty() {
            return Err(Error::EmptyInput {
                context: "MixWeights",
            });
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidWeights {
                reason: "weights must be finite and nonnegative".to_string(),
            });
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.weights
    }

    pub fn on_simplex(&self) -> bool {
        self.simplex
    }
}

/// A differentiable problem with `num_objectives` losses over a shared
/// parameter vector. Implementations must route `gradients` and `evaluate`
/// through the same loss computation so the bundled losses match bitwise.
pub trait MultiObjectiveProblem {
    /// Parameter dimension.
    fn dim(&self) -> usize;

    /// Number of objectives.
    fn num_objectives(&self) -> usize;

    /// All losses at `params`.
    fn evaluate(&self, params: &[f64]) -> LossVector;

    /// All gradients at `params`, with the losses they were evaluated at.
    fn gradients(&self, params: &[f64]) -> GradientSet;

    /// Per-step gradients for problems trained on a minibatch schedule.
    /// Defaults to the full (step-independent) gradients.
    fn gradients_at(&self, step: usize, params: &[f64]) -> GradientSet {
        let _ = step;
        self.gradients(params)
    }

    /// Known joint optimum, if any, for convergence detection.
    fn optimum(&self) -> Option<&[f64]> {
        None
    }
}

/// Linear combination of the per-objective gradients, reduced in ascending
/// objective order for determinism.
pub fn combined_direction(weights: &MixWeights, grads: &GradientSet) -> Result<Vec<f64>> {
    if weights.len() != grads.count() {
        return Err(Error::DimensionMismatch {
            context: "combined_direction: weights vs gradients",
            expected: grads.count(),
            actual: weights.len(),
        });
    }
    let mut out = vec![0.0; grads.dim()];
    for (w, g) in weights.values().iter().zip(grads.grads()) {
        for (o, x) in out.iter_mut().zip(g) {
            *o += w * x;
        }
    }
    Ok(out)
}
