use super::{check_level, SolverPath, WeightSolution};
use crate::error::{Error, Result};
use crate::normal;
use crate::par;
use crate::root::{solve_monotone_with, Bracket, SolveOptions};

/// Means at or above zero are moved to this value before weighting.
pub const NONNEGATIVE_MEAN_CLAMP: f64 = -1e-8;

/// Optimal weights when the effect sizes are known exactly:
/// `w(mu) = Phi(mu/2 + c/mu) / q` with `c` chosen so the weights sum to `J`.
///
/// The formula requires negative means. Entries `mu_i >= 0` are clamped to
/// [`NONNEGATIVE_MEAN_CLAMP`] and a warning is logged.
pub fn spjotvoll_weights(mus: &[f64], q: f64) -> Result<WeightSolution> {
    check_level(q)?;
    if mus.is_empty() {
        return Ok(WeightSolution::empty(q, SolverPath::Spjotvoll));
    }
    if let Some(bad) = mus.iter().find(|m| !m.is_finite()) {
        return Err(Error::domain(format!("effect sizes must be finite, got {bad}")));
    }
    let clamped = mus.iter().filter(|&&m| m >= 0.0).count();
    if clamped > 0 {
        log::warn!(
            "{clamped} of {} effect sizes are non-negative; clamped to {NONNEGATIVE_MEAN_CLAMP}",
            mus.len()
        );
    }
    let mus: Vec<f64> = mus
        .iter()
        .map(|&m| if m >= 0.0 { NONNEGATIVE_MEAN_CLAMP } else { m })
        .collect();

    let n = mus.len();
    let target = n as f64 * q;
    let arg = |i: usize, c: f64| mus[i] / 2.0 + c / mus[i];
    // Relative excess of sum_i Phi(arg_i) over Jq; decreasing in c.
    let excess = |c: f64| {
        let (s, ds) = par::sum2(n, |i| {
            let a = arg(i, c);
            (normal::cdf(a), normal::pdf(a) / mus[i])
        });
        ((s - target) / target, ds / target)
    };

    let (mut lo, mut hi) = (-1.0, 1.0);
    let mut f_lo = excess(lo).0;
    while f_lo <= 0.0 {
        lo *= 2.0;
        f_lo = excess(lo).0;
        if lo < -1e300 {
            return Err(Error::domain("could not bracket the Spjotvoll constant"));
        }
    }
    let mut f_hi = excess(hi).0;
    while f_hi >= 0.0 {
        hi *= 2.0;
        f_hi = excess(hi).0;
        if hi > 1e300 {
            return Err(Error::domain("could not bracket the Spjotvoll constant"));
        }
    }
    let bracket = Bracket::new(lo, hi, f_lo, f_hi)?;
    let c = solve_monotone_with(
        excess,
        bracket,
        SolveOptions {
            ftol: 1e-13,
            xtol: 1e-15,
            max_iter: 300,
        },
    )?;

    let weights: Vec<f64> = (0..n).map(|i| normal::cdf(arg(i, c)) / q).collect();
    let objective = (0..n).map(|i| normal::cdf(arg(i, c) - mus[i])).sum();
    log::debug!("spjotvoll: c = {c}, J = {n}");
    Ok(WeightSolution {
        weights,
        lambda: c.exp(),
        q,
        q_star: q,
        exact: true,
        objective,
        path: SolverPath::Spjotvoll,
    })
}
