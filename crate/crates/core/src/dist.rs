//! Bounded sampling distributions used by the demographic configuration.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MAX_REJECTIONS: usize = 1000;

/// A scalar distribution with finite support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundedDist {
    /// Normal(mean, sd) conditioned on `[min, max]`.
    TruncatedNormal {
        mean: f64,
        sd: f64,
        min: f64,
        max: f64,
    },
    Uniform {
        min: f64,
        max: f64,
    },
}

impl BoundedDist {
    pub fn truncated_normal(mean: f64, sd: f64, min: f64, max: f64) -> Self {
        BoundedDist::TruncatedNormal { mean, sd, min, max }
    }

    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            BoundedDist::TruncatedNormal { min, max, .. } | BoundedDist::Uniform { min, max } => (min, max),
        }
    }

    pub fn validate(&self, field: &str) -> Result<()> {
        let (min, max) = self.bounds();
        if !min.is_finite() || !max.is_finite() {
            return Err(Error::config(field, "distribution bounds must be finite"));
        }
        if min > max {
            return Err(Error::config(field, format!("min {min} exceeds max {max}")));
        }
        if let BoundedDist::TruncatedNormal { mean, sd, .. } = *self {
            if !mean.is_finite() || !sd.is_finite() || sd < 0.0 {
                return Err(Error::config(field, "mean must be finite and sd non-negative"));
            }
        }
        Ok(())
    }

    /// Draws one value. Truncation is by rejection; if the window is so far
    /// in the tail that rejection keeps failing, the last draw is clamped.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            BoundedDist::Uniform { min, max } => {
                if min == max {
                    min
                } else {
                    rng.random_range(min..=max)
                }
            }
            BoundedDist::TruncatedNormal { mean, sd, min, max } => {
                if sd == 0.0 || min == max {
                    return mean.clamp(min, max);
                }
                let mut x = mean;
                for _ in 0..MAX_REJECTIONS {
                    let z: f64 = StandardNormal.sample(rng);
                    x = mean + sd * z;
                    if (min..=max).contains(&x) {
                        return x;
                    }
                }
                x.clamp(min, max)
            }
        }
    }
}

/// Log-normal specified by its median and log-scale standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogNormalSpec {
    pub median: f64,
    pub sigma: f64,
}

impl LogNormalSpec {
    pub fn validate(&self, field: &str) -> Result<()> {
        if !(self.median.is_finite() && self.median > 0.0) {
            return Err(Error::config(field, "median must be positive"));
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(Error::config(field, "sigma must be non-negative"));
        }
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        self.median * (self.sigma * z).exp()
    }
}

/// Index drawn from a discrete distribution given by `probs` (assumed to sum to one).
pub fn categorical<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // Rounding slack: fall back to the last category with positive mass.
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// Checks that `probs` is a probability vector.
pub fn check_probabilities(field: &str, probs: &[f64]) -> Result<()> {
    if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::config(field, "probabilities must be finite and non-negative"));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::config(field, format!("probabilities sum to {sum}, expected 1")));
    }
    Ok(())
}
