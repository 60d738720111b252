//! Weighted testing of a study from prior summary statistics.
//!
//! Prior statistics `T0_i` with sample sizes `N0_i` map to Gaussian priors
//! `eta_i = sqrt(N_i / N0_i) T0_i`, `sigma_i^2 = phi N_i / N0_i` on the
//! current test statistics. Current p-values are one-sided, `P_i = Phi(T_i)`,
//! small when the statistic is negative. With two-tailed priors each id
//! contributes the pair `(eta_i, sigma_i^2)`, `(-eta_i, sigma_i^2)`; the second
//! test is run on `1 - P_i` and the id is rejected when either test rejects.

mod io;

pub use io::{
    read_outcomes, read_study, write_outcomes, write_study, write_weights, OutcomeMeta,
    ReadOptions, ACCEPTED_COLUMNS,
};

use crate::error::{Error, Result};
use crate::normal;
use crate::weights::{check_level, PriorEffect, WeightSolution};

/// Prior summary statistic of one hypothesis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PriorStat {
    /// Signed z-scale statistic `T0`.
    Z(f64),
    /// Two-sided p-value with an optional direction (`+1` or `-1`).
    P { p: f64, sign: Option<f64> },
}

impl PriorStat {
    /// `T0`; p-values map to `sign * |Phi^{-1}(p / 2)|`, negative by default.
    pub fn z(&self) -> f64 {
        match *self {
            PriorStat::Z(z) => z,
            PriorStat::P { p, sign } => {
                let mag = normal::quantile_unchecked(p / 2.0).abs();
                if sign.unwrap_or(-1.0) > 0.0 {
                    mag
                } else {
                    -mag
                }
            }
        }
    }

    pub fn is_signed(&self) -> bool {
        !matches!(self, PriorStat::P { sign: None, .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub id: String,
    pub prior: PriorStat,
    pub n_prior: f64,
    pub n_current: f64,
    pub p_current: Option<f64>,
}

impl StudyRow {
    pub fn validate(&self) -> Result<()> {
        let fail = |message: String| {
            Err(Error::Validation {
                id: self.id.clone(),
                message,
            })
        };
        if !(self.n_prior > 0.0) || !self.n_prior.is_finite() {
            return fail(format!("n_prior must be positive, got {}", self.n_prior));
        }
        if !(self.n_current > 0.0) || !self.n_current.is_finite() {
            return fail(format!("n_current must be positive, got {}", self.n_current));
        }
        match self.prior {
            PriorStat::Z(z) if !z.is_finite() => {
                return fail(format!("prior_z must be finite, got {z}"));
            }
            PriorStat::P { p, .. } if !(p > 0.0 && p <= 1.0) => {
                return fail(format!("prior_p must lie in (0, 1], got {p}"));
            }
            PriorStat::P { sign: Some(s), .. } if s != 1.0 && s != -1.0 => {
                return fail(format!("prior_sign must be +1 or -1, got {s}"));
            }
            _ => {}
        }
        if let Some(p) = self.p_current {
            if !(0.0..=1.0).contains(&p) {
                return fail(format!("p_current must lie in [0, 1], got {p}"));
            }
        }
        Ok(())
    }

    fn require_p(&self) -> Result<f64> {
        self.p_current.ok_or_else(|| Error::Validation {
            id: self.id.clone(),
            message: "p_current is required for testing".into(),
        })
    }
}

/// One-tailed: each id is tested in the direction of its prior statistic.
/// Two-tailed: each id is tested in both directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tail {
    One,
    Two,
}

impl Tail {
    /// Two-tailed when any prior is an unsigned p-value.
    pub fn default_for(rows: &[StudyRow]) -> Tail {
        if rows.iter().all(|r| r.prior.is_signed()) {
            Tail::One
        } else {
            Tail::Two
        }
    }

    pub fn tests_per_row(&self) -> usize {
        match self {
            Tail::One => 1,
            Tail::Two => 2,
        }
    }
}

/// Priors on the current test statistics; `2J` entries for [`Tail::Two`],
/// ordered `(eta_1, -eta_1, eta_2, -eta_2, ...)`.
pub fn map_prior(rows: &[StudyRow], phi: f64, tail: Tail) -> Result<Vec<PriorEffect>> {
    if !(phi > 0.0) || !phi.is_finite() {
        return Err(Error::domain(format!("dispersion phi must be positive, got {phi}")));
    }
    let mut effs = Vec::with_capacity(rows.len() * tail.tests_per_row());
    for row in rows {
        row.validate()?;
        let ratio = row.n_current / row.n_prior;
        let eta = ratio.sqrt() * row.prior.z();
        let sigma2 = phi * ratio;
        let wrap = |e: Result<PriorEffect>| {
            e.map_err(|err| Error::Validation {
                id: row.id.clone(),
                message: err.to_string(),
            })
        };
        effs.push(wrap(PriorEffect::new(eta, sigma2))?);
        if tail == Tail::Two {
            effs.push(wrap(PriorEffect::new(-eta, sigma2))?);
        }
    }
    Ok(effs)
}

/// Decision for one id.
#[derive(Debug, Clone, PartialEq)]
pub struct TestOutcome {
    pub id: String,
    pub weight: f64,
    /// Level the p-value was compared against.
    pub threshold: f64,
    pub rejected: bool,
    /// The p-value compared: `P_i`, or `1 - P_i` for the mirrored test.
    pub p_value: f64,
}

fn tail_of(rows: &[StudyRow], n_weights: usize) -> Result<Tail> {
    if n_weights == rows.len() {
        Ok(Tail::One)
    } else if n_weights == 2 * rows.len() {
        Ok(Tail::Two)
    } else {
        Err(Error::domain(format!(
            "{n_weights} weights for {} rows (expected {} or {})",
            rows.len(),
            rows.len(),
            2 * rows.len()
        )))
    }
}

/// Per-test p-values in weight order.
fn test_pvalues(rows: &[StudyRow], tail: Tail) -> Result<Vec<f64>> {
    let mut ps = Vec::with_capacity(rows.len() * tail.tests_per_row());
    for row in rows {
        row.validate()?;
        let p = row.require_p()?;
        ps.push(p);
        if tail == Tail::Two {
            ps.push(1.0 - p);
        }
    }
    Ok(ps)
}

/// Reduces per-test decisions to one outcome per id. For two tails the
/// reported test is the one that rejected, preferring the direction the
/// statistic points to.
fn reduce(
    rows: &[StudyRow],
    tail: Tail,
    weights: &[f64],
    thresholds: &[f64],
    ps: &[f64],
    rejected: &[bool],
) -> Vec<TestOutcome> {
    let k = tail.tests_per_row();
    rows.iter()
        .enumerate()
        .map(|(r, row)| {
            let base = r * k;
            let mut pick = base;
            if k == 2 {
                let (lower, upper) = (base, base + 1);
                let observed = if ps[lower] <= ps[upper] { lower } else { upper };
                let other = lower + upper - observed;
                pick = if !rejected[observed] && rejected[other] {
                    other
                } else {
                    observed
                };
            }
            TestOutcome {
                id: row.id.clone(),
                weight: weights[pick],
                threshold: thresholds[pick],
                rejected: rejected[pick],
                p_value: ps[pick],
            }
        })
        .collect()
}

/// Rejects test `i` when `P_i <= q_star w_i`.
///
/// `solution` holds one weight per row, or two per row (two-tailed).
pub fn weighted_bonferroni(rows: &[StudyRow], solution: &WeightSolution) -> Result<Vec<TestOutcome>> {
    let tail = tail_of(rows, solution.len())?;
    let ps = test_pvalues(rows, tail)?;
    let thresholds = solution.thresholds();
    let rejected: Vec<bool> = ps.iter().zip(&thresholds).map(|(p, t)| p <= t).collect();
    Ok(reduce(rows, tail, &solution.weights, &thresholds, &ps, &rejected))
}

/// Weighted Benjamini-Hochberg at FDR level `q_fdr`: step-up on `P_i / w_i`
/// against `r q_fdr / m`, with `m` the number of tests. Zero weights never
/// reject.
pub fn weighted_bh(rows: &[StudyRow], weights: &[f64], q_fdr: f64) -> Result<Vec<TestOutcome>> {
    check_level(q_fdr)?;
    let tail = tail_of(rows, weights.len())?;
    let m = weights.len();
    let total: f64 = weights.iter().sum();
    if weights.iter().any(|w| !(*w >= 0.0)) || (total - m as f64).abs() > 1e-6 * m as f64 {
        return Err(Error::domain(format!(
            "weighted BH needs non-negative weights summing to {m}, got sum {total}"
        )));
    }
    let ps = test_pvalues(rows, tail)?;
    let scaled: Vec<f64> = ps
        .iter()
        .zip(weights)
        .map(|(&p, &w)| if w > 0.0 { p / w } else { f64::INFINITY })
        .collect();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| scaled[a].total_cmp(&scaled[b]).then(a.cmp(&b)));
    let step = q_fdr / m as f64;
    let cutoff_rank = (1..=m)
        .rev()
        .find(|&r| scaled[order[r - 1]] <= r as f64 * step)
        .unwrap_or(0);
    let level = cutoff_rank as f64 * step;
    let thresholds: Vec<f64> = weights.iter().map(|&w| (w * level).min(1.0)).collect();
    let rejected: Vec<bool> = scaled.iter().map(|&s| s <= level).collect();
    log::debug!("weighted BH: {cutoff_rank} of {m} tests rejected");
    Ok(reduce(rows, tail, weights, &thresholds, &ps, &rejected))
}
