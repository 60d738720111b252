#![allow(dead_code)]

use pvw_core::normal;
use pvw_core::PriorEffect;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// `Phi((Phi^{-1}(q w) - eta) / gamma)` with the boundary cases spelled out.
pub fn summand(w: f64, e: &PriorEffect, q: f64) -> f64 {
    let t = q * w;
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        normal::cdf((normal::quantile(t).unwrap() - e.eta()) / e.gamma())
    }
}

pub fn objective(ws: &[f64], effs: &[PriorEffect], q: f64) -> f64 {
    ws.iter().zip(effs).map(|(&w, e)| summand(w, e, q)).sum()
}

/// Brute-force maximum of the average-power objective for `J = 2` or `3`:
/// exhaustive grid with spacing `h` on `{sum w = J, 0 <= w <= 1/q}`, then a
/// pairwise-transfer pattern search down to `tol`.
pub fn brute_force(effs: &[PriorEffect], q: f64, h: f64, tol: f64) -> (f64, Vec<f64>) {
    let j = effs.len();
    assert!(j == 2 || j == 3);
    let n = (j as f64 / h).round() as usize;
    let cap = 1.0 / q;
    let table: Vec<Vec<f64>> = effs
        .iter()
        .map(|e| {
            (0..=n)
                .map(|a| {
                    let w = a as f64 * h;
                    if w > cap * (1.0 + 1e-12) {
                        f64::NEG_INFINITY
                    } else {
                        summand(w, e, q)
                    }
                })
                .collect()
        })
        .collect();
    let mut best = (f64::NEG_INFINITY, vec![0usize; j]);
    if j == 2 {
        for a in 0..=n {
            let v = table[0][a] + table[1][n - a];
            if v > best.0 {
                best = (v, vec![a, n - a]);
            }
        }
    } else {
        for a in 0..=n {
            for b in 0..=n - a {
                let v = table[0][a] + table[1][b] + table[2][n - a - b];
                if v > best.0 {
                    best = (v, vec![a, b, n - a - b]);
                }
            }
        }
    }
    let mut w: Vec<f64> = best.1.iter().map(|&a| a as f64 * h).collect();
    let mut val = objective(&w, effs, q);
    let mut step = h;
    while step >= tol {
        let mut improved = true;
        while improved {
            improved = false;
            for i in 0..j {
                for k in 0..j {
                    if i == k || w[i] + step > cap || w[k] - step < 0.0 {
                        continue;
                    }
                    let mut cand = w.clone();
                    cand[i] += step;
                    cand[k] -= step;
                    let v = objective(&cand, effs, q);
                    if v > val {
                        val = v;
                        w = cand;
                        improved = true;
                    }
                }
            }
        }
        step /= 2.0;
    }
    (val, w)
}

/// `eta ~ N(0, 1)`, `sigma ~ |N(0, 1)|`.
pub fn random_effects(rng: &mut ChaCha8Rng, j: usize) -> Vec<PriorEffect> {
    (0..j)
        .map(|_| {
            let eta: f64 = StandardNormal.sample(rng);
            let s: f64 = StandardNormal.sample(rng);
            PriorEffect::with_sd(eta, s.abs()).unwrap()
        })
        .collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}
