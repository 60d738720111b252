//! Simulation designs comparing weighting schemes, and synthetic studies.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::alt::{exponential_weights, filter_weights, FilterSpec};
use crate::error::Result;
use crate::normal;
use crate::power::{average_power, deterministic_power};
use crate::study::{PriorStat, StudyRow};
use crate::weights::{bayes_weights_general, spjotvoll_weights, PriorEffect, WeightSolution};

/// Power of one scheme at one value of its tuning parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub scheme: &'static str,
    /// `phi` for bayes, `beta` for exponential, `|M|` for filter, NaN for
    /// unweighted.
    pub parameter: f64,
    /// Average power per test under the generating priors.
    pub power: f64,
}

/// `eta_i ~ N(0, 1)` and `sigma_i ~ |N(0, 1)|`, independently.
pub fn random_priors(j: usize, seed: u64) -> Vec<PriorEffect> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..j)
        .map(|_| {
            let eta: f64 = rng.sample(StandardNormal);
            let s: f64 = rng.sample(StandardNormal);
            PriorEffect::new(eta, s * s).expect("finite draws")
        })
        .collect()
}

/// Evenly spaced grid of `points` values on `[lo, hi]`.
pub fn linear_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        n => (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Bayes weights computed with prior variances scaled by `phi`; `phi = 0`
/// gives the Spjotvoll weights of the prior means.
pub fn bayes_with_dispersion(effs: &[PriorEffect], phi: f64, q: f64) -> Result<WeightSolution> {
    if phi == 0.0 {
        let etas: Vec<f64> = effs.iter().map(|e| e.eta()).collect();
        return spjotvoll_weights(&etas, q);
    }
    let scaled = effs
        .iter()
        .map(|e| e.scaled_variance(phi))
        .collect::<Result<Vec<_>>>()?;
    bayes_weights_general(&scaled, q)
}

/// Average power of unweighted, Bayes (over `phis`), exponential (over
/// `betas`) and filtering (over `thresholds`, given as `|M|`) weights, all
/// evaluated under the priors `effs`.
pub fn compare_sweep(
    effs: &[PriorEffect],
    q: f64,
    phis: &[f64],
    betas: &[f64],
    thresholds: &[f64],
) -> Result<Vec<SweepPoint>> {
    let j = effs.len();
    let etas: Vec<f64> = effs.iter().map(|e| e.eta()).collect();
    let mut out = vec![SweepPoint {
        scheme: "unweighted",
        parameter: f64::NAN,
        power: average_power(&vec![1.0; j], effs, q)?,
    }];
    for &phi in phis {
        let sol = bayes_with_dispersion(effs, phi, q)?;
        log::debug!("bayes phi = {phi}: path {}, q* = {}", sol.path.as_str(), sol.q_star);
        out.push(SweepPoint {
            scheme: "bayes",
            parameter: phi,
            power: average_power(&sol.weights, effs, sol.q_star)?,
        });
    }
    for &beta in betas {
        let w = exponential_weights(&etas, beta, q)?;
        out.push(SweepPoint {
            scheme: "exponential",
            parameter: beta,
            power: average_power(&w, effs, q)?,
        });
    }
    for &m in thresholds {
        let w = filter_weights(&etas, &FilterSpec::new(-m.abs(), q)?);
        out.push(SweepPoint {
            scheme: "filter",
            parameter: m.abs(),
            power: average_power(&w, effs, q)?,
        });
    }
    Ok(out)
}

/// One scheme at one mixing fraction of the sparse design.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsePoint {
    pub pi1: f64,
    pub scheme: &'static str,
    /// Power when the means equal the prior means exactly.
    pub deterministic: f64,
    /// Power averaged over `mu_i ~ N(eta_i, sigma^2)`.
    pub average: f64,
    /// Weight of the large means (NaN when there are none).
    pub w_large: f64,
    /// Weight of the small means (NaN when there are none).
    pub w_small: f64,
}

/// Parameters of the two-class design: `round(pi1 J)` means at `large`, the
/// rest at `small`, all with prior standard deviation `sigma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparseDesign {
    pub j: usize,
    pub q: f64,
    pub small: f64,
    pub large: f64,
    pub sigma: f64,
}

impl Default for SparseDesign {
    fn default() -> Self {
        SparseDesign {
            j: 1000,
            q: 0.01,
            small: -1e-3,
            large: -2.0,
            sigma: 1.0,
        }
    }
}

impl SparseDesign {
    pub fn means(&self, pi1: f64) -> Vec<f64> {
        let n1 = ((pi1 * self.j as f64).round() as usize).min(self.j);
        let mut mus = vec![self.large; n1];
        mus.resize(self.j, self.small);
        mus
    }

    /// Unweighted, Spjotvoll and Bayes weights at each `pi1`.
    pub fn sweep(&self, pi1s: &[f64]) -> Result<Vec<SparsePoint>> {
        let mut out = Vec::with_capacity(3 * pi1s.len());
        for &pi1 in pi1s {
            let mus = self.means(pi1);
            let n1 = mus.iter().filter(|&&m| m == self.large).count();
            let effs = mus
                .iter()
                .map(|&m| PriorEffect::with_sd(m, self.sigma))
                .collect::<Result<Vec<_>>>()?;
            let schemes = [
                ("unweighted", WeightSolution::fixed(vec![1.0; self.j], self.q)),
                ("spjotvoll", spjotvoll_weights(&mus, self.q)?),
                ("bayes", bayes_weights_general(&effs, self.q)?),
            ];
            for (scheme, sol) in schemes {
                let w = &sol.weights;
                out.push(SparsePoint {
                    pi1,
                    scheme,
                    deterministic: deterministic_power(w, &mus, sol.q_star)?,
                    average: average_power(w, &effs, sol.q_star)?,
                    w_large: if n1 > 0 { w[0] } else { f64::NAN },
                    w_small: if n1 < self.j { w[self.j - 1] } else { f64::NAN },
                });
            }
        }
        Ok(out)
    }
}

/// Settings for [`synthetic_study`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticConfig {
    pub j: usize,
    /// Fraction of non-null hypotheses.
    pub pi1: f64,
    /// Standardised effect of the non-nulls in the prior study.
    pub effect: f64,
    pub n_prior: f64,
    pub n_current: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            j: 1000,
            pi1: 0.1,
            effect: -3.0,
            n_prior: 1000.0,
            n_current: 1000.0,
            seed: 0,
        }
    }
}

/// A generated study and the true means of its current statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticStudy {
    pub rows: Vec<StudyRow>,
    pub means: Vec<f64>,
}

/// Draws a study in which the prior statistic is an unbiased measurement of
/// the same effect: `T0_i = m_i + Z0_i`, `T_i = sqrt(N_i/N0_i) m_i + Z_i`, with
/// `m_i = effect` for a random `pi1` fraction and 0 otherwise. Current
/// p-values are `Phi(T_i)`.
pub fn synthetic_study(cfg: &SyntheticConfig) -> SyntheticStudy {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let scale = (cfg.n_current / cfg.n_prior).sqrt();
    let width = cfg.j.max(1).to_string().len();
    let mut rows = Vec::with_capacity(cfg.j);
    let mut means = Vec::with_capacity(cfg.j);
    for i in 0..cfg.j {
        let m = if rng.random::<f64>() < cfg.pi1 { cfg.effect } else { 0.0 };
        let z0: f64 = rng.sample(StandardNormal);
        let z: f64 = rng.sample(StandardNormal);
        let mu = scale * m;
        rows.push(StudyRow {
            id: format!("h{i:0width$}"),
            prior: PriorStat::Z(m + z0),
            n_prior: cfg.n_prior,
            n_current: cfg.n_current,
            p_current: Some(normal::cdf(mu + z)),
        });
        means.push(mu);
    }
    SyntheticStudy { rows, means }
}
