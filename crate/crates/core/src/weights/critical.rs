//! Optimal critical values of the per-test Lagrangian term
//! `f(c) = Phi((c - eta)/gamma) - lambda * Phi(c)` and the quantities derived
//! from it: the lower end of its domain, the applicability conditions of the
//! small-q solver, and the breakpoint where the interior maximum ties with
//! the value at `c = +inf`.

use super::{PriorEffect, DEGENERATE_SIGMA2};
use crate::error::{Error, Result};
use crate::normal;
use crate::par;
use crate::root::{solve_monotone_with, Bracket, SolveOptions};

/// Smaller root `c1(eta, gamma; lambda)` of the stationarity equation.
///
/// Fails when the discriminant `eta^2 + 2(gamma^2 - 1) log(gamma lambda)` is
/// negative, i.e. for `lambda < lower_lambda(eff)`.
pub fn critical_value(eff: &PriorEffect, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::domain(format!("lambda must be positive, got {lambda}")));
    }
    if !eff.is_degenerate() || eff.eta >= 0.0 {
        let disc = discriminant(eff, lambda);
        let scale = eff.eta * eff.eta + 1.0;
        if disc < -1e-12 * scale {
            return Err(Error::domain(format!(
                "negative discriminant {disc} at lambda = {lambda} (lower bound {})",
                lower_lambda_unchecked(eff)
            )));
        }
    }
    Ok(c1(eff, lambda))
}

fn discriminant(eff: &PriorEffect, lambda: f64) -> f64 {
    eff.eta * eff.eta + 2.0 * eff.sigma2 * ln_gamma_lambda(eff, lambda)
}

fn ln_gamma_lambda(eff: &PriorEffect, lambda: f64) -> f64 {
    0.5 * eff.sigma2.ln_1p() + lambda.ln()
}

/// Unchecked `c1`; a slightly negative discriminant is clamped to zero.
///
/// Near-zero prior variances use the `sigma -> 0` limit `eta/2 + log(lambda)/eta`
/// for negative means and `-inf` for non-negative ones.
pub(crate) fn c1(eff: &PriorEffect, lambda: f64) -> f64 {
    let PriorEffect { eta, sigma2, gamma } = *eff;
    if sigma2 < DEGENERATE_SIGMA2 {
        if eta < 0.0 {
            return eta / 2.0 + lambda.ln() / eta;
        }
        if sigma2 == 0.0 {
            return f64::NEG_INFINITY;
        }
    }
    let log_gl = ln_gamma_lambda(eff, lambda);
    if eta < 0.0 {
        // Rationalised form; avoids cancellation in eta + gamma*sqrt(disc).
        let g2 = gamma * gamma;
        let num = eta * eta + 2.0 * g2 * log_gl;
        let r2 = (eta * eta + sigma2 * num).max(0.0);
        -num / (r2.sqrt() - eta)
    } else {
        let disc = (eta * eta + 2.0 * sigma2 * log_gl).max(0.0);
        -(eta + gamma * disc.sqrt()) / sigma2
    }
}

/// `d c1 / d lambda`.
pub(crate) fn c1_slope(eff: &PriorEffect, lambda: f64) -> f64 {
    let PriorEffect { eta, sigma2, gamma } = *eff;
    if sigma2 < DEGENERATE_SIGMA2 {
        if eta < 0.0 {
            return 1.0 / (lambda * eta);
        }
        if sigma2 == 0.0 {
            return 0.0;
        }
    }
    // gamma * sqrt(disc) = sqrt(eta^2 + R^2)
    let disc = discriminant(eff, lambda).max(0.0);
    -gamma / (lambda * disc.sqrt())
}

/// `l(eta, gamma) = exp(-eta^2 / (2 (gamma^2 - 1))) / gamma`, the smallest
/// dual value for which the interior critical point exists.
pub fn lower_lambda(eff: &PriorEffect) -> Result<f64> {
    if eff.sigma2 <= 0.0 {
        return Err(Error::domain(
            "lower_lambda needs a positive prior variance (gamma > 1)",
        ));
    }
    Ok(lower_lambda_unchecked(eff))
}

fn lower_lambda_unchecked(eff: &PriorEffect) -> f64 {
    (-eff.eta * eff.eta / (2.0 * eff.sigma2)).exp() / eff.gamma
}

/// Outcome of [`check_small_q_condition`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallQCondition {
    pub holds: bool,
    /// `(1/J) sum_i Phi(c1(eta_i, gamma_i; 1)) - q`.
    pub slack: f64,
}

/// Whether `q <= (1/J) sum_i Phi(c1(eta_i, gamma_i; 1))`, under which the
/// dual variable of the small-q solver exists.
pub fn check_small_q_condition(effs: &[PriorEffect], q: f64) -> SmallQCondition {
    if effs.is_empty() {
        return SmallQCondition {
            holds: true,
            slack: f64::INFINITY,
        };
    }
    let total = par::sum(effs.len(), |i| normal::cdf(c1(&effs[i], 1.0)));
    let slack = total / effs.len() as f64 - q;
    SmallQCondition {
        holds: slack >= 0.0,
        slack,
    }
}

/// Outcome of [`check_simple_condition`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimpleCondition {
    pub holds: bool,
    /// `|z_{alpha/K}|`.
    pub z_abs: f64,
    /// Number of indices satisfying the two-sided bound.
    pub count: usize,
}

/// Sufficient condition for [`check_small_q_condition`]: at least `k`
/// indices with negative prior mean and
/// `gamma^2 ln(gamma^2) / |z| <= |eta| <= |z|`, where `z = Phi^{-1}(alpha / k)`.
pub fn check_simple_condition(
    effs: &[PriorEffect],
    alpha: f64,
    k: usize,
) -> Result<SimpleCondition> {
    if !(alpha > 0.0) || k == 0 {
        return Err(Error::domain(format!(
            "simple condition needs alpha > 0 and K >= 1, got alpha = {alpha}, K = {k}"
        )));
    }
    let level = (alpha / k as f64).min(1.0);
    let z_abs = normal::quantile(level)?.abs();
    let count = effs
        .iter()
        .filter(|e| {
            let g2 = e.gamma * e.gamma;
            let lower = g2 * e.sigma2.ln_1p() / z_abs;
            e.eta < 0.0 && lower <= -e.eta && -e.eta <= z_abs
        })
        .count();
    Ok(SimpleCondition {
        holds: count >= k,
        z_abs,
        count,
    })
}

/// `d(lambda) = lambda Phi(-c1) - Phi(-(c1 - eta)/gamma)`: interior maximum of
/// the Lagrangian term minus its limit `1 - lambda` at `c = +inf`.
pub fn breakpoint_gap(eff: &PriorEffect, lambda: f64) -> f64 {
    let c = c1(eff, lambda);
    lambda * normal::sf(c) - normal::sf((c - eff.eta) / eff.gamma)
}

/// Breakpoint `k(eta, gamma)`: for `lambda < k` the Lagrangian term is
/// maximised at `c = +inf` (weight `1/q`), for `lambda > k` at `c1`.
///
/// The gap is strictly increasing on `[l(eta, gamma), 1]` with a single root.
pub fn breakpoint_k(eff: &PriorEffect) -> f64 {
    if eff.sigma2 == 0.0 {
        // Known effect: the interior maximum always wins for eta < 0 and
        // never exists otherwise.
        return if eff.eta < 0.0 { 0.0 } else { 1.0 };
    }
    let lo = if eff.is_degenerate() && eff.eta < 0.0 {
        f64::MIN_POSITIVE
    } else {
        lower_lambda_unchecked(eff).max(f64::MIN_POSITIVE)
    };
    if lo >= 1.0 {
        return 1.0;
    }
    let gap = |lambda: f64| breakpoint_gap(eff, lambda);
    let g_lo = gap(lo);
    if !(g_lo < 0.0) {
        return lo;
    }
    let g_hi = gap(1.0);
    if !(g_hi > 0.0) {
        return 1.0;
    }
    let bracket = match Bracket::new(lo, 1.0, g_lo, g_hi) {
        Ok(b) => b,
        Err(_) => return 1.0,
    };
    let opts = SolveOptions {
        ftol: 0.0,
        xtol: 1e-15,
        max_iter: 200,
    };
    let with_slope = |lambda: f64| (gap(lambda), normal::sf(c1(eff, lambda)));
    match solve_monotone_with(with_slope, bracket, opts) {
        Ok(k) => k,
        Err(Error::Convergence { best, .. }) => best,
        Err(_) => 1.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    fn eff(eta: f64, sigma: f64) -> PriorEffect {
        PriorEffect::with_sd(eta, sigma).unwrap()
    }

    /// Maximises `Phi((c - eta)/gamma) - lambda Phi(c)` on a grid, then
    /// refines by golden-section search.
    fn grid_argmax(e: &PriorEffect, lambda: f64) -> f64 {
        let f = |c: f64| normal::cdf((c - e.eta()) / e.gamma()) - lambda * normal::cdf(c);
        let mut best = -10.0;
        let mut x = -10.0;
        while x <= 10.0 {
            if f(x) > f(best) {
                best = x;
            }
            x += 1e-3;
        }
        let (mut a, mut b) = (best - 1e-3, best + 1e-3);
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let c = b - phi * (b - a);
            let d = a + phi * (b - a);
            if f(c) > f(d) {
                b = d;
            } else {
                a = c;
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn critical_value_examples() {
        let c = critical_value(&eff(0.0, 1.0), 1.0).unwrap();
        assert!((c + SQRT_2 * 2f64.ln().sqrt()).abs() < 1e-14);
        assert!((c + 1.177_41).abs() < 1e-5);

        let c = critical_value(&eff(-1.0, 1e-7), 1.0).unwrap();
        assert!((c + 0.5).abs() < 1e-9);
        let c = critical_value(&PriorEffect::new(-1.0, 0.0).unwrap(), 1.0).unwrap();
        assert_eq!(c, -0.5);

        let e = eff(-1.0, 1.0);
        let c = critical_value(&e, 1.0).unwrap();
        let oracle = grid_argmax(&e, 1.0);
        // The flat top of f limits the argmax oracle to about sqrt(eps).
        assert!((c - oracle).abs() < 1e-7, "c={c} oracle={oracle}");
    }

    #[test]
    fn critical_value_is_stationary() {
        for &(eta, sigma, lambda) in &[(-1.0, 1.0, 1.0), (0.5, 2.0, 3.0), (-3.0, 0.3, 1.5)] {
            let e = eff(eta, sigma);
            let c = critical_value(&e, lambda).unwrap();
            let lhs = normal::pdf((c - eta) / e.gamma()) / (e.gamma() * normal::pdf(c));
            assert!((lhs / lambda - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn negative_discriminant_is_rejected() {
        let e = eff(-1.0, 1.0);
        let l = lower_lambda(&e).unwrap();
        assert!(matches!(critical_value(&e, 0.5 * l), Err(Error::Domain(_))));
        let at_l = critical_value(&e, l).unwrap();
        assert!((at_l - 1.0).abs() < 1e-6, "c1(l) = -eta/sigma^2 = 1, got {at_l}");
        assert!(critical_value(&e, 0.0).is_err());
    }

    #[test]
    fn lower_lambda_examples() {
        assert!((lower_lambda(&eff(0.0, 1.0)).unwrap() - 1.0 / SQRT_2).abs() < 1e-15);
        let l = lower_lambda(&eff(-1.0, 1.0)).unwrap();
        assert!((l - (-0.5f64).exp() / SQRT_2).abs() < 1e-15);
        assert!((l - 0.428_882).abs() < 1e-6);
        let l = lower_lambda(&eff(-3.0, 1.0)).unwrap();
        assert!((l - (-4.5f64).exp() / SQRT_2).abs() < 1e-16);
        assert!((l - 0.007_855).abs() < 1e-6);
        assert!(lower_lambda(&PriorEffect::new(0.0, 0.0).unwrap()).is_err());
    }

    #[test]
    fn small_q_condition_examples() {
        let effs = [eff(0.0, 1.0)];
        assert!(check_small_q_condition(&effs, 0.0).holds);
        let c = check_small_q_condition(&effs, 0.1);
        assert!(c.holds);
        // Phi(-sqrt(2 ln 2)) = 0.1195159457...
        assert!((c.slack + 0.1 - 0.119_515_945_72).abs() < 1e-10);
        assert!(!check_small_q_condition(&effs, 0.2).holds);
    }

    #[test]
    fn simple_condition_examples() {
        let effs: Vec<_> = (0..10).map(|_| eff(-1.0, 1.0)).collect();
        let c = check_simple_condition(&effs, 0.01, 10).unwrap();
        assert!((c.z_abs - 3.090_232_306_167_813).abs() < 1e-9);
        assert!(c.holds);
        // Bound with sigma = 1 uses the natural log.
        assert!((2.0 * 2f64.ln() / c.z_abs - 0.448_6).abs() < 1e-4);

        let pos: Vec<_> = (0..10).map(|_| eff(1.0, 1.0)).collect();
        assert!(!check_simple_condition(&pos, 0.01, 10).unwrap().holds);
        assert!(check_simple_condition(&pos, 0.0, 10).is_err());
    }

    #[test]
    fn breakpoint_bracket_signs() {
        for &(eta, sigma) in &[(-1.0, 1.0), (0.0, 0.5), (2.0, 3.0), (-4.0, 0.2)] {
            let e = eff(eta, sigma);
            let l = lower_lambda(&e).unwrap();
            assert!(breakpoint_gap(&e, 1.0) > 0.0);
            // Both tails underflow at l for strongly negative eta.
            assert!(breakpoint_gap(&e, l) <= 0.0);
            let k = breakpoint_k(&e);
            assert!(l <= k && k <= 1.0);
            assert!(breakpoint_gap(&e, k).abs() < 1e-14);
        }
    }

    #[test]
    fn breakpoint_matches_grid_scan() {
        let e = eff(-1.0, 1.0);
        // Independent route: scan lambda on a grid for the sign change of
        // lambda Phi(-c1) - Phi(-(c1 - eta)/gamma) with c1 from the textbook
        // formula, then bisect.
        let g = |lambda: f64| {
            let gamma = SQRT_2;
            let c = -(-1.0 + gamma * (1.0 + 2.0 * (gamma * lambda).ln()).sqrt());
            lambda * normal::cdf(-c) - normal::cdf(-(c + 1.0) / gamma)
        };
        let l = lower_lambda(&e).unwrap();
        let mut lo = l;
        let mut step_hi = l;
        while g(step_hi) < 0.0 {
            lo = step_hi;
            step_hi += 1e-4;
        }
        let mut hi = step_hi;
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if g(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let k = breakpoint_k(&e);
        assert!((k - 0.5 * (lo + hi)).abs() < 1e-9, "k={k} oracle={}", 0.5 * (lo + hi));
    }

    #[test]
    fn degenerate_breakpoints() {
        assert_eq!(breakpoint_k(&PriorEffect::new(-1.0, 0.0).unwrap()), 0.0);
        assert_eq!(breakpoint_k(&PriorEffect::new(0.5, 0.0).unwrap()), 1.0);
        let k = breakpoint_k(&PriorEffect::new(-1.0, 1e-12).unwrap());
        assert!(k < 1e-100);
    }
}
