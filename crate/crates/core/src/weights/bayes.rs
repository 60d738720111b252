//! Bayes weights: maximise `sum_i Phi((Phi^{-1}(q w_i) - eta_i) / gamma_i)`
//! subject to `sum_i w_i = J`, `w_i in [0, 1/q]`.
//!
//! Both solvers work on the separable Lagrangian. With `u_i = q w_i` the
//! per-test maximiser is `u_i = Phi(c1(eta_i, gamma_i; lambda))` when
//! `lambda > k_i` and `u_i = 1` when `lambda < k_i`, where `k_i` is the
//! breakpoint of test `i`. The dual search finds `lambda` with
//! `sum_i u_i = J q`; when that sum jumps over `J q` at a breakpoint, a
//! subset of the tied tests is switched to `u_i = 1` and the weights are
//! rescaled to the nearby level `q_star`.

use super::critical::{c1, c1_slope};
use super::{
    breakpoint_k, check_level, check_small_q_condition, PriorEffect, SolverPath, WeightSolution,
};
use crate::error::{Error, Result};
use crate::normal;
use crate::par;
use crate::root::{solve_monotone_with, Bracket, SolveOptions};

const DUAL_OPTS: SolveOptions = SolveOptions {
    ftol: 1e-13,
    xtol: 1e-15,
    max_iter: 300,
};

/// Total weight `W(lambda) = sum_i w_i(lambda)` of the Lagrangian maximisers.
///
/// At a breakpoint `lambda = k_i` the interior value is used, which makes
/// `W` right-continuous. Non-increasing in `lambda`.
pub fn weight_sum(effs: &[PriorEffect], lambda: f64, q: f64) -> f64 {
    par::sum(effs.len(), |i| {
        let e = &effs[i];
        if lambda < breakpoint_k(e) {
            1.0
        } else {
            normal::cdf(c1(e, lambda))
        }
    }) / q
}

/// Exact Bayes weights when `q` is small enough that the dual variable is at
/// least one, i.e. `q <= (1/J) sum_i Phi(c1(eta_i, gamma_i; 1))`.
///
/// Returns [`Error::Precondition`] when that condition fails; use
/// [`bayes_weights_general`] instead.
pub fn bayes_weights_small_q(effs: &[PriorEffect], q: f64) -> Result<WeightSolution> {
    check_level(q)?;
    if effs.is_empty() {
        return Ok(WeightSolution::empty(q, SolverPath::SmallQ));
    }
    let cond = check_small_q_condition(effs, q);
    if !cond.holds {
        return Err(Error::Precondition(format!(
            "q = {q} exceeds the small-q bound by {:.3e}; use the general solver",
            -cond.slack
        )));
    }
    let n = effs.len();
    let target = n as f64 * q;
    let all = |lambda: f64| interior_sum(effs, lambda, n, target);

    let f_lo = all(1.0).0;
    let lambda = if f_lo <= 0.0 {
        1.0
    } else {
        let mut hi = 2.0;
        let mut f_hi = all(hi).0;
        while f_hi >= 0.0 {
            hi *= 2.0;
            if hi > 1e300 {
                return Err(Error::Convergence {
                    best: hi,
                    iterations: 0,
                });
            }
            f_hi = all(hi).0;
        }
        log::debug!("small-q: dual bracket [1, {hi}]");
        solve_monotone_with(all, Bracket::new(1.0, hi, f_lo, f_hi)?, DUAL_OPTS)?
    };
    log::debug!("small-q: lambda = {lambda}");

    let u: Vec<f64> = par::map(n, |i| normal::cdf(c1(&effs[i], lambda)));
    Ok(finish(effs, &u, q, lambda, SolverPath::SmallQ))
}

/// Relative excess `(sum_i Phi(c1_i) - Jq) / Jq` and its derivative in `lambda`.
fn interior_sum(effs: &[PriorEffect], lambda: f64, n: usize, target: f64) -> (f64, f64) {
    let (s, ds) = par::sum2(n, |i| slope_term(&effs[i], lambda));
    ((s - target) / target, ds / target)
}

fn slope_term(e: &PriorEffect, lambda: f64) -> (f64, f64) {
    let c = c1(e, lambda);
    let d = normal::pdf(c);
    let ds = if d == 0.0 { 0.0 } else { d * c1_slope(e, lambda) };
    (normal::cdf(c), ds)
}

/// Bayes weights for any `q in (0, 1)`.
///
/// Uses the small-q solver whenever its condition holds. Otherwise computes
/// every breakpoint, binary-searches the sorted breakpoints for the interval
/// containing the dual root, and either solves inside that interval (exact)
/// or pins `lambda` at a breakpoint and rescales to `q_star` with
/// `|q_star - q| <= 1/(2J)`.
pub fn bayes_weights_general(effs: &[PriorEffect], q: f64) -> Result<WeightSolution> {
    check_level(q)?;
    if effs.is_empty() {
        return Ok(WeightSolution::empty(q, SolverPath::Interval));
    }
    if check_small_q_condition(effs, q).holds {
        return bayes_weights_small_q(effs, q);
    }

    let n = effs.len();
    let target = n as f64 * q;
    let ks: Vec<f64> = par::map(n, |i| breakpoint_k(&effs[i]));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by(|&a, &b| ks[a].total_cmp(&ks[b]).then(a.cmp(&b)));

    // Groups of tied breakpoints: (value, start, end) in `order`.
    let mut groups: Vec<(f64, usize, usize)> = Vec::new();
    for (pos, &i) in order.iter().enumerate() {
        match groups.last_mut() {
            Some(g) if g.0 == ks[i] => g.2 = pos + 1,
            _ => groups.push((ks[i], pos, pos + 1)),
        }
    }
    log::debug!("general: {} breakpoints, {} distinct", n, groups.len());

    // Tests sorted before `prefix` take their interior value, the rest 1.
    let mass = |lambda: f64, prefix: usize| -> f64 {
        (n - prefix) as f64 + par::sum(prefix, |t| normal::cdf(c1(&effs[order[t]], lambda)))
    };
    // Left limit at a breakpoint (tied tests still at 1) is non-increasing in
    // the group index; find the last group where it is still >= Jq.
    let upper_mass = |g: usize| mass(groups[g].0, groups[g].1);
    let (mut lo, mut hi) = (0usize, groups.len());
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if upper_mass(mid) >= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let g = lo;
    let (k_g, start, end) = groups[g];
    let lower = mass(k_g, end);
    log::debug!("general: breakpoint group {g} at lambda = {k_g}, right limit {lower} vs Jq = {target}");

    if lower >= target {
        let lambda = solve_interval(effs, &order, &groups, g, n, target, lower)?;
        log::debug!("general: exact dual root lambda = {lambda}");
        let mut u = vec![1.0; n];
        let interior = par::map(end, |t| normal::cdf(c1(&effs[order[t]], lambda)));
        for (t, v) in interior.into_iter().enumerate() {
            u[order[t]] = v;
        }
        return Ok(finish(effs, &u, q, lambda, SolverPath::Interval));
    }

    // Jump case: pin lambda at the breakpoint and choose which tied tests
    // jump to 1, in ascending index order.
    let mut u = vec![1.0; n];
    for &i in &order[..end] {
        u[i] = normal::cdf(c1(&effs[i], k_g));
    }
    let tied = &order[start..end];
    let mut r_minus = lower;
    let mut switched = 0;
    while switched < tied.len() {
        let s = 1.0 - u[tied[switched]];
        if r_minus + s > target {
            break;
        }
        r_minus += s;
        switched += 1;
    }
    let mut total = r_minus;
    if switched < tied.len() {
        let r_plus = r_minus + (1.0 - u[tied[switched]]);
        let take_plus = r_minus <= 0.0 || target - r_minus > r_plus - target;
        if take_plus {
            total = r_plus;
            switched += 1;
        }
        log::debug!("general: jump of {} tied tests, r- = {r_minus}, r+ = {r_plus}", tied.len());
    }
    for &i in &tied[..switched] {
        u[i] = 1.0;
    }

    let mut sol = finish(effs, &u, q, k_g, SolverPath::Jump);
    let scale = n as f64 / total;
    for (w, &v) in sol.weights.iter_mut().zip(&u) {
        *w = v * scale;
    }
    sol.q_star = total / n as f64;
    sol.exact = total == target;
    log::debug!("general: W* = {}, q* = {}", total / q, sol.q_star);
    Ok(sol)
}

/// Solves for the dual root between breakpoint group `g` and the next one.
fn solve_interval(
    effs: &[PriorEffect],
    order: &[usize],
    groups: &[(f64, usize, usize)],
    g: usize,
    n: usize,
    target: f64,
    lower: f64,
) -> Result<f64> {
    let (k_g, _, end) = groups[g];
    let f = |lambda: f64| {
        let (s, ds) = par::sum2(end, |t| slope_term(&effs[order[t]], lambda));
        ((s + (n - end) as f64 - target) / target, ds / target)
    };
    let f_lo = (lower - target) / target;
    if f_lo <= 0.0 {
        return Ok(k_g);
    }
    let (hi, f_hi) = match groups.get(g + 1) {
        Some(next) => (next.0, f(next.0).0),
        None => {
            let mut hi = k_g.max(0.5) * 2.0;
            let mut f_hi = f(hi).0;
            while f_hi >= 0.0 {
                hi *= 2.0;
                if hi > 1e300 {
                    return Err(Error::Convergence {
                        best: hi,
                        iterations: 0,
                    });
                }
                f_hi = f(hi).0;
            }
            (hi, f_hi)
        }
    };
    solve_monotone_with(f, Bracket::new(k_g, hi, f_lo, f_hi)?, DUAL_OPTS)
}

fn finish(
    effs: &[PriorEffect],
    u: &[f64],
    q: f64,
    lambda: f64,
    path: SolverPath,
) -> WeightSolution {
    let n = effs.len();
    let objective = par::sum(n, |i| {
        let e = &effs[i];
        if u[i] >= 1.0 {
            1.0
        } else {
            normal::cdf((normal::quantile_unchecked(u[i]) - e.eta()) / e.gamma())
        }
    });
    let weights = u.iter().map(|&v| v / q).collect();
    WeightSolution {
        weights,
        lambda,
        q,
        q_star: q,
        exact: true,
        objective,
        path,
    }
}
