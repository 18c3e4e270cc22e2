//! Finite discrete distributions over non-negative reals.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::MdpError;

/// Absolute tolerance used when checking that probability vectors sum to one.
pub const PROB_TOL: f64 = 1e-12;

/// A finite distribution with a strictly ascending support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDistribution")]
pub struct DiscreteDistribution {
    support: Vec<f64>,
    probs: Vec<f64>,
}

#[derive(Deserialize)]
struct RawDistribution {
    support: Vec<f64>,
    probs: Vec<f64>,
}

impl TryFrom<RawDistribution> for DiscreteDistribution {
    type Error = MdpError;

    fn try_from(raw: RawDistribution) -> Result<Self, MdpError> {
        Self::new(raw.support, raw.probs)
    }
}

impl DiscreteDistribution {
    pub fn new(support: Vec<f64>, probs: Vec<f64>) -> Result<Self, MdpError> {
        if support.is_empty() {
            return Err(MdpError::InvalidDistribution("empty support".into()));
        }
        if support.len() != probs.len() {
            return Err(MdpError::InvalidDistribution(format!(
                "support has {} points but {} probabilities",
                support.len(),
                probs.len()
            )));
        }
        if support.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(MdpError::InvalidDistribution(
                "support values must be finite and non-negative".into(),
            ));
        }
        if support.windows(2).any(|w| w[0] >= w[1]) {
            return Err(MdpError::InvalidDistribution(
                "support must be strictly ascending".into(),
            ));
        }
        if probs.iter().any(|p| !p.is_finite() || !(0.0..=1.0).contains(p)) {
            return Err(MdpError::InvalidDistribution(
                "probabilities must lie in [0, 1]".into(),
            ));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_TOL {
            return Err(MdpError::InvalidDistribution(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(Self { support, probs })
    }

    /// Point mass at `value`.
    pub fn point(value: f64) -> Self {
        Self::new(vec![value], vec![1.0]).expect("point mass at a non-negative finite value")
    }

    /// Bernoulli distribution on {0, 1} with success probability `p`.
    pub fn bernoulli(p: f64) -> Self {
        if p <= 0.0 {
            Self::point(0.0)
        } else if p >= 1.0 {
            Self::point(1.0)
        } else {
            Self {
                support: vec![0.0, 1.0],
                probs: vec![1.0 - p, p],
            }
        }
    }

    /// Merges equal values and sorts. Zero-probability points are kept.
    pub fn from_pairs(mut pairs: Vec<(f64, f64)>) -> Result<Self, MdpError> {
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut support: Vec<f64> = Vec::with_capacity(pairs.len());
        let mut probs: Vec<f64> = Vec::with_capacity(pairs.len());
        for (v, p) in pairs {
            match support.last() {
                Some(last) if *last == v => *probs.last_mut().unwrap() += p,
                _ => {
                    support.push(v);
                    probs.push(p);
                }
            }
        }
        Self::new(support, probs)
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.support
            .iter()
            .zip(&self.probs)
            .map(|(v, p)| v * p)
            .sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.support
            .iter()
            .zip(&self.probs)
            .map(|(v, p)| p * (v - m) * (v - m))
            .sum()
    }

    /// Largest support value carrying positive probability.
    pub fn max_value(&self) -> f64 {
        self.support
            .iter()
            .zip(&self.probs)
            .filter(|(_, p)| **p > 0.0)
            .map(|(v, _)| *v)
            .fold(0.0, f64::max)
    }

    /// `Pr(X >= threshold)`.
    pub fn prob_at_least(&self, threshold: f64) -> f64 {
        self.support
            .iter()
            .zip(&self.probs)
            .filter(|(v, _)| **v >= threshold)
            .map(|(_, p)| *p)
            .sum()
    }

    /// Index of the support point selected by a single uniform draw `u` in `[0, 1)`.
    pub fn index_for(&self, u: f64) -> usize {
        sample_index(&self.probs, u)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.support[self.index_for(rng.gen::<f64>())]
    }
}

/// Inverse-CDF lookup over a probability vector; falls back to the last
/// positive-mass entry when rounding leaves `u` past the cumulative total.
pub(crate) fn sample_index(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (j, p) in probs.iter().enumerate() {
        if *p > 0.0 {
            acc += p;
            last_positive = j;
            if u < acc {
                return j;
            }
        }
    }
    last_positive
}
