//! Optimal p-value weights.
//!
//! All solvers return a [`WeightSolution`]: weights averaging to one, the
//! dual variable of the sum constraint, and the per-test level `q_star` at
//! which the weights are optimal.

mod bayes;
mod critical;
mod sparse;
mod spjotvoll;

pub use bayes::{bayes_weights_general, bayes_weights_small_q, weight_sum};
pub use critical::{
    breakpoint_k, breakpoint_gap, check_simple_condition, check_small_q_condition,
    critical_value, lower_lambda, SimpleCondition, SmallQCondition,
};
pub use sparse::{sparse_optimal, SparseMixture, SparseSolution};
pub use spjotvoll::spjotvoll_weights;

use crate::error::{Error, Result};

/// Prior variances below this are treated as exactly known effects.
pub const DEGENERATE_SIGMA2: f64 = 1e-10;

/// Prior `N(eta, sigma2)` on the mean of one test statistic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorEffect {
    eta: f64,
    sigma2: f64,
    gamma: f64,
}

impl PriorEffect {
    pub fn new(eta: f64, sigma2: f64) -> Result<Self> {
        if !eta.is_finite() {
            return Err(Error::domain(format!("prior mean must be finite, got {eta}")));
        }
        if !(sigma2 >= 0.0) || !sigma2.is_finite() {
            return Err(Error::domain(format!(
                "prior variance must be finite and non-negative, got {sigma2}"
            )));
        }
        Ok(PriorEffect {
            eta,
            sigma2,
            gamma: (sigma2 + 1.0).sqrt(),
        })
    }

    /// Builds the prior from a standard deviation instead of a variance.
    pub fn with_sd(eta: f64, sigma: f64) -> Result<Self> {
        Self::new(eta, sigma * sigma)
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// Marginal standard deviation of the test statistic, `sqrt(sigma2 + 1)`.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Same mean, variance multiplied by `factor`.
    pub fn scaled_variance(&self, factor: f64) -> Result<Self> {
        Self::new(self.eta, self.sigma2 * factor)
    }

    pub(crate) fn is_degenerate(&self) -> bool {
        self.sigma2 < DEGENERATE_SIGMA2
    }
}

/// Which branch of which solver produced a [`WeightSolution`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverPath {
    /// Dual search over `lambda >= 1`; exact.
    SmallQ,
    /// Dual root inside a smooth interval between breakpoints; exact.
    Interval,
    /// Dual variable pinned at a breakpoint, weights rescaled to `q_star`.
    Jump,
    Spjotvoll,
    /// Weights supplied by a baseline scheme; no dual variable.
    Fixed,
}

impl SolverPath {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolverPath::SmallQ => "small-q",
            SolverPath::Interval => "general-interval",
            SolverPath::Jump => "general-jump",
            SolverPath::Spjotvoll => "spjotvoll",
            SolverPath::Fixed => "fixed",
        }
    }
}

/// Result of a weight computation.
///
/// `weights` sum to `J` and lie in `[0, 1/q_star]`. `objective` is the
/// attained value of the solver's objective summed over tests (expected
/// number of rejections), evaluated at `q_star`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSolution {
    pub weights: Vec<f64>,
    pub lambda: f64,
    /// The level that was requested.
    pub q: f64,
    pub q_star: f64,
    pub exact: bool,
    pub objective: f64,
    pub path: SolverPath,
}

impl WeightSolution {
    pub(crate) fn empty(q: f64, path: SolverPath) -> Self {
        WeightSolution {
            weights: Vec::new(),
            lambda: f64::NAN,
            q,
            q_star: q,
            exact: true,
            objective: 0.0,
            path,
        }
    }

    /// Wraps weights from a baseline scheme, used at the requested level.
    pub fn fixed(weights: Vec<f64>, q: f64) -> Self {
        WeightSolution {
            weights,
            lambda: f64::NAN,
            q,
            q_star: q,
            exact: true,
            objective: f64::NAN,
            path: SolverPath::Fixed,
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Per-test rejection thresholds `q_star * w_i`.
    pub fn thresholds(&self) -> Vec<f64> {
        self.weights
            .iter()
            .map(|&w| rejection_threshold(self.q_star, w))
            .collect()
    }
}

/// `q * w`, snapped to 1 when `w` is the cap `1/q` up to rounding so capped
/// tests always reject.
pub fn rejection_threshold(q: f64, w: f64) -> f64 {
    let t = q * w;
    if t >= 1.0 - 4.0 * f64::EPSILON {
        1.0
    } else {
        t
    }
}

pub(crate) fn check_level(q: f64) -> Result<()> {
    if q > 0.0 && q < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("per-test level q must lie in (0, 1), got {q}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prior_effect_invariants() {
        let e = PriorEffect::new(-1.0, 3.0).unwrap();
        assert_eq!(e.gamma(), 2.0);
        assert!(PriorEffect::new(0.0, -1e-3).is_err());
        assert!(PriorEffect::new(f64::NAN, 1.0).is_err());
        assert!(PriorEffect::new(0.0, f64::INFINITY).is_err());
        let e = PriorEffect::with_sd(0.3, 0.7).unwrap();
        assert!((e.gamma() * e.gamma() - (e.sigma2() + 1.0)).abs() < 1e-15);
    }

    #[test]
    fn capped_weight_always_rejects() {
        for &q in &[0.3, 0.7, 1e-3, 0.1, 0.9] {
            assert_eq!(rejection_threshold(q, 1.0 / q), 1.0);
        }
        assert_eq!(rejection_threshold(0.01, 0.0), 0.0);
    }
}
