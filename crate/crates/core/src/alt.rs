//! Baseline weighting schemes: exponential tilting and filtering.
//!
//! Both return weights summing to `J` with every weight at most `1/q`.

use crate::error::{Error, Result};
use crate::weights::check_level;

/// Exponential weights `w_i ∝ exp(beta |eta_i|)`, scaled to sum to `J`.
///
/// Weights above `1/q` are truncated; walking down the weights in decreasing
/// order (ties by ascending index), each excess is added to the next weight,
/// which may in turn be truncated.
pub fn exponential_weights(etas: &[f64], beta: f64, q: f64) -> Result<Vec<f64>> {
    check_level(q)?;
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::domain(format!("tilt beta must be finite and >= 0, got {beta}")));
    }
    if let Some(bad) = etas.iter().find(|e| !e.is_finite()) {
        return Err(Error::domain(format!("prior means must be finite, got {bad}")));
    }
    let n = etas.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let score: Vec<f64> = etas.iter().map(|e| beta * e.abs()).collect();
    let top = score.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut w: Vec<f64> = score.iter().map(|s| (s - top).exp()).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x *= n as f64 / total);

    let cap = 1.0 / q;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| w[b].total_cmp(&w[a]).then(a.cmp(&b)));
    for t in 0..n {
        let i = order[t];
        if w[i] <= cap {
            break;
        }
        let excess = w[i] - cap;
        w[i] = cap;
        match order.get(t + 1) {
            Some(&next) => w[next] += excess,
            None => log::warn!("exponential weights: excess {excess} left after capping all weights"),
        }
    }
    Ok(w)
}

/// Threshold for [`filter_weights`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec {
    threshold_m: f64,
    q: f64,
}

impl FilterSpec {
    pub fn new(threshold_m: f64, q: f64) -> Result<Self> {
        if !(threshold_m <= 0.0) {
            return Err(Error::domain(format!(
                "filter threshold M must be <= 0, got {threshold_m}"
            )));
        }
        check_level(q)?;
        Ok(FilterSpec { threshold_m, q })
    }

    pub fn threshold_m(&self) -> f64 {
        self.threshold_m
    }

    pub fn q(&self) -> f64 {
        self.q
    }
}

/// Equal weights on `{i : eta_i <= M}`, zero elsewhere.
///
/// When fewer than `ceil(J q)` tests pass the threshold, the `ceil(J q)`
/// smallest means are selected instead (ties by ascending index), so no
/// weight exceeds `1/q`.
pub fn filter_weights(etas: &[f64], spec: &FilterSpec) -> Vec<f64> {
    let n = etas.len();
    if n == 0 {
        return Vec::new();
    }
    let min_size = ((n as f64 * spec.q) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let mut selected: Vec<usize> = (0..n).filter(|&i| etas[i] <= spec.threshold_m).collect();
    if selected.len() < min_size {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| etas[a].total_cmp(&etas[b]).then(a.cmp(&b)));
        selected = order[..min_size].to_vec();
    }
    let value = n as f64 / selected.len() as f64;
    let mut w = vec![0.0; n];
    for i in selected {
        w[i] = value;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_tilt_is_uniform() {
        let w = exponential_weights(&[-3.0, 0.5, 2.0], 0.0, 0.1).unwrap();
        assert_eq!(w, vec![1.0; 3]);
    }

    #[test]
    fn truncation_moves_excess_to_next_largest() {
        let e = std::f64::consts::E;
        let w = exponential_weights(&[-3.0, -1.0, 0.0], 1.0, 0.5).unwrap();
        let z = e.powi(3) + e + 1.0;
        let raw = [3.0 * e.powi(3) / z, 3.0 * e / z, 3.0 / z];
        assert!((raw[0] - 2.531_4).abs() < 1e-4);
        assert_eq!(w[0], 2.0);
        assert!((w[1] - (raw[1] + raw[0] - 2.0)).abs() < 1e-14);
        assert!((w[1] - 0.874).abs() < 1e-3);
        assert!((w[2] - raw[2]).abs() < 1e-15);
        assert!((w.iter().sum::<f64>() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn huge_tilt_does_not_overflow() {
        let w = exponential_weights(&[-800.0, -1.0, 0.0, -799.0], 5.0, 0.3).unwrap();
        assert!(w.iter().all(|x| x.is_finite()));
        assert!((w.iter().sum::<f64>() - 4.0).abs() < 1e-12);
        assert!(w.iter().all(|&x| x <= 1.0 / 0.3));
    }

    #[test]
    fn filter_selects_threshold_set() {
        let spec = FilterSpec::new(0.0, 0.1).unwrap();
        assert_eq!(filter_weights(&[-1.0, -0.2, 0.0], &spec), vec![1.0; 3]);
        let spec = FilterSpec::new(-1.0, 0.1).unwrap();
        let w = filter_weights(&[-2.0, 0.5, -1.0, -0.5], &spec);
        assert_eq!(w, vec![2.0, 0.0, 2.0, 0.0]);
    }

    #[test]
    fn filter_falls_back_to_most_significant() {
        let etas: Vec<f64> = (0..10).map(|i| -4.0 + 0.1 * ((i * 7) % 10) as f64).collect();
        let spec = FilterSpec::new(-5.0, 0.2).unwrap();
        let w = filter_weights(&etas, &spec);
        let picked: Vec<usize> = (0..10).filter(|&i| w[i] > 0.0).collect();
        assert_eq!(picked, vec![0, 3]);
        assert!(picked.iter().all(|&i| w[i] == 5.0));
    }

    #[test]
    fn filter_spec_validation() {
        assert!(FilterSpec::new(0.5, 0.1).is_err());
        assert!(FilterSpec::new(-1.0, 0.0).is_err());
    }

    fn contract(w: &[f64], q: f64) {
        let n = w.len() as f64;
        assert!((w.iter().sum::<f64>() - n).abs() <= 1e-9 * n);
        assert!(w.iter().all(|&x| x >= 0.0 && x <= (1.0 / q) * (1.0 + 1e-12)));
    }

    proptest! {
        #[test]
        fn exponential_contract_and_permutation(
            etas in prop::collection::vec(-6.0f64..6.0, 1..60),
            beta in 0.0f64..4.0,
            q in 0.001f64..0.9,
            rot in 0usize..60,
        ) {
            let w = exponential_weights(&etas, beta, q).unwrap();
            contract(&w, q);
            let k = rot % etas.len();
            let mut rotated = etas.clone();
            rotated.rotate_left(k);
            let mut expected = w.clone();
            expected.rotate_left(k);
            let got = exponential_weights(&rotated, beta, q).unwrap();
            // Permuting distinct inputs permutes the output; ties may swap
            // which member receives redistributed excess.
            let mut a = got.clone();
            let mut b = expected.clone();
            a.sort_by(f64::total_cmp);
            b.sort_by(f64::total_cmp);
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() <= 1e-12 * (1.0 + y.abs()));
            }
        }

        #[test]
        fn filter_contract(
            etas in prop::collection::vec(-5.0f64..2.0, 1..80),
            m in -5.0f64..0.0,
            q in 0.001f64..0.9,
        ) {
            let spec = FilterSpec::new(m, q).unwrap();
            let w = filter_weights(&etas, &spec);
            contract(&w, q);
            let nonzero: Vec<f64> = w.iter().copied().filter(|&x| x > 0.0).collect();
            prop_assert!(nonzero.iter().all(|&x| x == nonzero[0]));
        }
    }
}
