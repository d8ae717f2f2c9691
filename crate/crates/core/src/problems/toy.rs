//! The 2D benchmark: a quadratic bowl and a steep exponential valley along
//! the unit circle, sharing their only joint optimum at (0, 1).
//!
//!   loss1(θ) = θ₁² + (θ₂ − 1)²
//!   loss2(θ) = 20·[exp((‖θ‖² − 1)²) − 1]
//!
//! Despite comparable losses at the benchmark start (0.8, −0.2), the second
//! gradient is more than an order of magnitude larger, which is exactly the
//! scale imbalance the gradient combinators are meant to handle.

use crate::types::{GradientSet, LossVector, MultiObjectiveProblem};

/// The shared optimum (0, 1).
pub const TOY_OPTIMUM: [f64; 2] = [0.0, 1.0];

/// The benchmark initialisation (0.8, −0.2).
pub const TOY_INIT: [f64; 2] = [0.8, -0.2];

/// Both loss values at θ.
pub fn toy_losses(theta: &[f64]) -> LossVector {
    assert_eq!(theta.len(), 2, "toy problem is two-dimensional");
    let (x, y) = (theta[0], theta[1]);
    let l1 = x * x + (y - 1.0) * (y - 1.0);
    let u = x * x + y * y - 1.0;
    let l2 = 20.0 * ((u * u).exp() - 1.0);
    LossVector::new(vec![l1, l2]).expect("toy losses finite")
}

/// Analytic gradients with the losses they were evaluated at.
///
/// grad1 = (2θ₁, 2(θ₂−1)); grad2 = 80·u·e^{u²}·θ with u = ‖θ‖² − 1.
pub fn toy_grads(theta: &[f64]) -> GradientSet {
    assert_eq!(theta.len(), 2, "toy problem is two-dimensional");
    let (x, y) = (theta[0], theta[1]);
    let g1 = vec![2.0 * x, 2.0 * (y - 1.0)];
    let u = x * x + y * y - 1.0;
    let c = 80.0 * u * (u * u).exp();
    let g2 = vec![c * x, c * y];
    GradientSet::new(vec![g1, g2], toy_losses(theta)).expect("toy gradients finite")
}

/// The landscape as a problem instance.
#[derive(Debug, Clone, Copy, Default)]
pub struct ToyProblem2D;

impl MultiObjectiveProblem for ToyProblem2D {
    fn dim(&self) -> usize {
        2
    }

    fn num_objectives(&self) -> usize {
        2
    }

    fn evaluate(&self, params: &[f64]) -> LossVector {
        toy_losses(params)
    }

    fn gradients(&self, params: &[f64]) -> GradientSet {
        toy_grads(params)
    }

    fn optimum(&self) -> Option<&[f64]> {
        Some(&TOY_OPTIMUM)
    }
}
