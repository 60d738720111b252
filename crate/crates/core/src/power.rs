//! Power of weighted Bonferroni: analytic objectives, the sparse-mixture
//! closed forms, and a seeded Monte Carlo estimator.
//!
//! Powers are per test: expected rejections divided by `J`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::normal;
use crate::weights::{
    check_level, rejection_threshold, sparse_optimal, PriorEffect, SparseMixture,
};

/// Power summary of one scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerReport {
    pub scheme_name: String,
    pub analytic_power: f64,
    pub mc_power: Option<f64>,
    pub mc_se: Option<f64>,
    pub n_reps: Option<usize>,
}

impl PowerReport {
    pub fn analytic(scheme_name: impl Into<String>, analytic_power: f64) -> Self {
        PowerReport {
            scheme_name: scheme_name.into(),
            analytic_power,
            mc_power: None,
            mc_se: None,
            n_reps: None,
        }
    }

    pub fn with_scheme(mut self, scheme_name: impl Into<String>) -> Self {
        self.scheme_name = scheme_name.into();
        self
    }
}

fn check_weights(weights: &[f64], n: usize) -> Result<()> {
    if weights.len() != n {
        return Err(Error::domain(format!(
            "{} weights for {n} tests",
            weights.len()
        )));
    }
    if let Some(bad) = weights.iter().find(|w| !(**w >= 0.0)) {
        return Err(Error::domain(format!("weights must be non-negative, got {bad}")));
    }
    Ok(())
}

/// `Phi^{-1}(q w)`, with `-inf` for zero weight and `+inf` at the cap.
fn critical(q: f64, w: f64) -> f64 {
    let t = rejection_threshold(q, w);
    if t >= 1.0 {
        f64::INFINITY
    } else {
        normal::quantile_unchecked(t)
    }
}

/// `(1/J) sum_i Phi(Phi^{-1}(q w_i) - mu_i)`: power when the means are known.
pub fn deterministic_power(weights: &[f64], mus: &[f64], q: f64) -> Result<f64> {
    check_level(q)?;
    check_weights(weights, mus.len())?;
    if mus.is_empty() {
        return Ok(0.0);
    }
    let total: f64 = weights
        .iter()
        .zip(mus)
        .map(|(&w, &mu)| normal::cdf(critical(q, w) - mu))
        .sum();
    Ok(total / mus.len() as f64)
}

/// `(1/J) sum_i Phi((Phi^{-1}(q w_i) - eta_i) / gamma_i)`: power averaged over
/// the prior on each mean.
pub fn average_power(weights: &[f64], effs: &[PriorEffect], q: f64) -> Result<f64> {
    check_level(q)?;
    check_weights(weights, effs.len())?;
    if effs.is_empty() {
        return Ok(0.0);
    }
    let total: f64 = weights
        .iter()
        .zip(effs)
        .map(|(&w, e)| normal::cdf((critical(q, w) - e.eta()) / e.gamma()))
        .sum();
    Ok(total / effs.len() as f64)
}

/// Power of unweighted Bonferroni under a sparse mixture:
/// `pi0 q + pi1 Phi(Phi^{-1}(q) + |M|)`.
pub fn sparse_power_unweighted(mix: &SparseMixture) -> f64 {
    mix.pi0() * mix.q() + mix.pi1() * normal::cdf(normal::quantile_unchecked(mix.q()) + mix.m().abs())
}

/// Ratio of optimal to unweighted power, one row per entry of `m_grid`, one
/// column per entry of `pi1_grid`.
pub fn power_ratio_grid(m_grid: &[f64], pi1_grid: &[f64], q: f64) -> Result<Vec<Vec<f64>>> {
    if m_grid.is_empty() || pi1_grid.is_empty() {
        return Err(Error::domain("power ratio grid needs non-empty M and pi1 grids"));
    }
    m_grid
        .iter()
        .map(|&m| {
            pi1_grid
                .iter()
                .map(|&pi1| {
                    let mix = SparseMixture::new(pi1, m, q)?;
                    Ok(sparse_optimal(&mix).power / sparse_power_unweighted(&mix))
                })
                .collect()
        })
        .collect()
}

/// Simulates `mu_i ~ N(eta_i, sigma_i^2)`, `T_i ~ N(mu_i, 1)` and counts
/// rejections `Phi(T_i) <= q w_i`.
///
/// Replicate `r` draws from a ChaCha8 stream keyed by `(seed, r)`, two normals
/// per test in index order, so results do not depend on thread count. The
/// standard error is that of the mean of the per-replicate rejection
/// fractions.
pub fn monte_carlo_power(
    weights: &[f64],
    effs: &[PriorEffect],
    q: f64,
    n_reps: usize,
    seed: u64,
) -> Result<PowerReport> {
    check_level(q)?;
    check_weights(weights, effs.len())?;
    if n_reps == 0 {
        return Err(Error::domain("Monte Carlo needs at least one replicate"));
    }
    let analytic = average_power(weights, effs, q)?;
    let n = effs.len();
    if n == 0 {
        return Ok(PowerReport {
            scheme_name: String::new(),
            analytic_power: analytic,
            mc_power: Some(0.0),
            mc_se: Some(0.0),
            n_reps: Some(n_reps),
        });
    }
    let cuts: Vec<f64> = weights.iter().map(|&w| critical(q, w)).collect();
    let sds: Vec<f64> = effs.iter().map(|e| e.sigma2().sqrt()).collect();
    let fractions: Vec<f64> = (0..n_reps as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(rep);
            let mut rejected = 0usize;
            for i in 0..n {
                let z_mu: f64 = rng.sample(StandardNormal);
                let z_t: f64 = rng.sample(StandardNormal);
                let t = effs[i].eta() + sds[i] * z_mu + z_t;
                if t <= cuts[i] {
                    rejected += 1;
                }
            }
            rejected as f64 / n as f64
        })
        .collect();
    let reps = n_reps as f64;
    let mean = fractions.iter().sum::<f64>() / reps;
    let se = if n_reps > 1 {
        let var = fractions.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (reps - 1.0);
        (var / reps).sqrt()
    } else {
        (mean * (1.0 - mean) / n as f64).sqrt()
    };
    log::debug!("monte carlo: {n_reps} reps of {n} tests, power {mean} +/- {se}");
    Ok(PowerReport {
        scheme_name: String::new(),
        analytic_power: analytic,
        mc_power: Some(mean),
        mc_se: Some(se),
        n_reps: Some(n_reps),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eff(eta: f64, sigma: f64) -> PriorEffect {
        PriorEffect::with_sd(eta, sigma).unwrap()
    }

    #[test]
    fn deterministic_power_examples() {
        let q = 0.05;
        let p = deterministic_power(&[1.0; 4], &[0.0; 4], q).unwrap();
        assert!((p - q).abs() < 1e-15);
        assert_eq!(deterministic_power(&[1.0 / q; 3], &[-1.0, 0.0, 2.0], q).unwrap(), 1.0);
        assert_eq!(deterministic_power(&[0.0; 3], &[-1.0, 0.0, 2.0], q).unwrap(), 0.0);
        assert!(deterministic_power(&[1.0; 2], &[0.0; 3], q).is_err());
    }

    #[test]
    fn average_power_reduces_to_deterministic() {
        let w = [0.5, 1.5, 3.0, 0.0];
        let mus = [-1.0, -2.5, 0.3, -0.7];
        let effs: Vec<_> = mus.iter().map(|&m| eff(m, 0.0)).collect();
        let a = average_power(&w, &effs, 0.02).unwrap();
        let d = deterministic_power(&w, &mus, 0.02).unwrap();
        assert_eq!(a, d);
    }

    #[test]
    fn diffuse_prior_gives_one_half() {
        let effs = vec![eff(0.0, 1e8); 5];
        let p = average_power(&[1.0; 5], &effs, 0.01).unwrap();
        assert!((p - 0.5).abs() < 1e-6);
    }

    #[test]
    fn symmetry_breaking_limit() {
        let (j, q) = (200usize, 0.013);
        let top = (j as f64 * q).floor() as usize;
        let rest = (j as f64 - top as f64 / q) / (j - top) as f64;
        let mut w = vec![1.0 / q; top];
        w.extend(vec![rest; j - top]);
        let effs = vec![eff(0.0, 1e6); j];
        let total = average_power(&w, &effs, q).unwrap() * j as f64;
        let expected = (j + top) as f64 / 2.0;
        assert!((total - expected).abs() / expected < 1e-3);
    }

    #[test]
    fn unweighted_sparse_power() {
        let mix = SparseMixture::new(0.1, -2.0, 0.001).unwrap();
        let p = sparse_power_unweighted(&mix);
        let expected = 0.9 * 0.001 + 0.1 * normal::cdf(normal::quantile(0.001).unwrap() + 2.0);
        assert!((p - expected).abs() < 1e-15);
        assert!((p - 0.014_68).abs() < 1e-5);
        let tiny = SparseMixture::new(0.3, -1e-12, 0.02).unwrap();
        assert!((sparse_power_unweighted(&tiny) - 0.02).abs() < 1e-12);
        let huge = SparseMixture::new(0.3, -60.0, 0.02).unwrap();
        assert!((sparse_power_unweighted(&huge) - (0.7 * 0.02 + 0.3)).abs() < 1e-15);
    }

    #[test]
    fn ratio_grid_dominates_one() {
        let ms: Vec<f64> = (1..=20).map(|k| -0.2 * k as f64).collect();
        let ps: Vec<f64> = (1..=20).map(|k| 0.024 * k as f64).collect();
        let grid = power_ratio_grid(&ms, &ps, 1e-3).unwrap();
        assert_eq!(grid.len(), 20);
        for row in &grid {
            for &r in row {
                assert!(r.is_finite() && r >= 1.0 - 1e-12);
            }
        }
        assert!(power_ratio_grid(&[], &ps, 1e-3).is_err());
    }

    #[test]
    fn monte_carlo_extremes_and_reproducibility() {
        let effs = vec![eff(-1.0, 0.5); 20];
        let q = 0.05;
        let all = monte_carlo_power(&[1.0 / q; 20], &effs, q, 50, 3).unwrap();
        assert_eq!(all.mc_power, Some(1.0));
        let none = monte_carlo_power(&[0.0; 20], &effs, q, 50, 3).unwrap();
        assert_eq!(none.mc_power, Some(0.0));
        let w: Vec<f64> = (0..20).map(|i| 0.1 * i as f64 + 0.05).collect();
        let a = monte_carlo_power(&w, &effs, q, 200, 9).unwrap();
        let b = monte_carlo_power(&w, &effs, q, 200, 9).unwrap();
        assert_eq!(a, b);
        assert!(monte_carlo_power(&w, &effs, q, 0, 9).is_err());
    }
}
