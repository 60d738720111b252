use super::check_level;
use crate::error::{Error, Result};
use crate::normal;

/// Two-point mixture of means: a fraction `pi1` at `m < 0`, the rest at zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparseMixture {
    pi1: f64,
    pi0: f64,
    m: f64,
    q: f64,
}

impl SparseMixture {
    pub fn new(pi1: f64, m: f64, q: f64) -> Result<Self> {
        if !(pi1 > 0.0 && pi1 < 1.0) {
            return Err(Error::domain(format!("pi1 must lie in (0, 1), got {pi1}")));
        }
        if !(m < 0.0) || !m.is_finite() {
            return Err(Error::domain(format!("large mean M must be negative, got {m}")));
        }
        check_level(q)?;
        Ok(SparseMixture {
            pi1,
            pi0: 1.0 - pi1,
            m,
            q,
        })
    }

    pub fn pi1(&self) -> f64 {
        self.pi1
    }

    pub fn pi0(&self) -> f64 {
        self.pi0
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// True when all weight goes to the large means.
    pub fn concentrated(&self) -> bool {
        self.pi1 * normal::cdf(-self.m.abs() / 2.0) > self.q
    }
}

/// Optimal class weights for a [`SparseMixture`] and the resulting power
/// per test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparseSolution {
    /// Weight on the null (zero) means.
    pub w0: f64,
    /// Weight on the large means.
    pub w1: f64,
    pub power: f64,
}

pub fn sparse_optimal(mix: &SparseMixture) -> SparseSolution {
    let (pi0, pi1, q) = (mix.pi0, mix.pi1, mix.q);
    let a = mix.m.abs();
    if mix.concentrated() {
        SparseSolution {
            w0: 0.0,
            w1: 1.0 / pi1,
            power: pi1 * normal::cdf(normal::quantile_unchecked(q / pi1) + a),
        }
    } else {
        let tail = normal::cdf(-a / 2.0);
        SparseSolution {
            w0: (q - pi1 * tail) / (q * pi0),
            w1: tail / q,
            power: q + pi1 * (normal::cdf(a / 2.0) - tail),
        }
    }
}
