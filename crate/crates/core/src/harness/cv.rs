//! Choosing the replication count from coefficient-of-variation stability.

use super::batch::{indicator, run_batch, BatchOptions};
use super::config::ScenarioConfig;
use crate::error::{Error, Result};

/// Smallest replication count considered.
pub const MIN_REPS: u32 = 10;
/// Consecutive increments that must stay within tolerance.
pub const STABLE_RUN: u32 = 5;
pub const DEFAULT_TOL: f64 = 0.005;

#[derive(Debug, Clone, PartialEq)]
pub struct CvReport {
    pub indicator: String,
    pub recommended: u32,
    pub stabilized: bool,
    /// (r, CV over the first r replications) for r = 2..=max_reps.
    pub trace: Vec<(u32, f64)>,
}

/// CV of a sample: sd / |mean|, zero when the sample has no spread.
pub fn coefficient_of_variation(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    if values.len() < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    if var <= 0.0 {
        0.0
    } else {
        var.sqrt() / mean.abs()
    }
}

/// Applies the stabilisation rule to CVs already computed for r = 2..
pub fn recommend(trace: &[(u32, f64)], max_reps: u32, tol: f64) -> (u32, bool) {
    let cv = |r: u32| trace.iter().find(|t| t.0 == r).map(|t| t.1);
    for r in MIN_REPS..=max_reps.saturating_sub(STABLE_RUN) {
        let stable = (1..=STABLE_RUN).all(|i| match (cv(r + i - 1), cv(r + i)) {
            (Some(a), Some(b)) => (b - a).abs() < tol || tol.is_infinite(),
            _ => false,
        });
        if stable {
            return (r, true);
        }
    }
    (max_reps, false)
}

/// Runs `max_reps` replications and finds the smallest r ≥ 10 after which the
/// CV of the indicator's terminal value moves less than `tol` for five
/// consecutive increments.
pub fn cv_stabilization(
    cfg: &ScenarioConfig,
    indicator_name: &str,
    max_reps: u32,
    tol: f64,
    opts: &BatchOptions,
) -> Result<CvReport> {
    if max_reps < MIN_REPS {
        return Err(Error::config("max_reps", format!("must be at least {MIN_REPS}")));
    }
    if indicator(indicator_name).is_none() {
        return Err(Error::config("indicator", format!("unknown indicator `{indicator_name}`")));
    }
    if tol.is_nan() || tol < 0.0 {
        return Err(Error::config("tol", "must be non-negative"));
    }
    let result = run_batch(cfg, &BatchOptions { reps: Some(max_reps), ..*opts })?;
    let terminal = result.values(indicator_name, result.last_period());
    let trace: Vec<(u32, f64)> =
        (2..=max_reps).map(|r| (r, coefficient_of_variation(&terminal[..r as usize]))).collect();
    let (recommended, stabilized) = recommend(&trace, max_reps, tol);
    Ok(CvReport { indicator: indicator_name.to_string(), recommended, stabilized, trace })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_trace_recommends_minimum() {
        let trace: Vec<(u32, f64)> = (2..=40).map(|r| (r, 0.0)).collect();
        assert_eq!(recommend(&trace, 40, DEFAULT_TOL), (MIN_REPS, true));
    }

    #[test]
    fn infinite_tolerance_recommends_minimum() {
        let trace: Vec<(u32, f64)> = (2..=30).map(|r| (r, r as f64)).collect();
        assert_eq!(recommend(&trace, 30, f64::INFINITY), (MIN_REPS, true));
    }

    #[test]
    fn never_stable_returns_max() {
        let trace: Vec<(u32, f64)> = (2..=30).map(|r| (r, (r % 2) as f64)).collect();
        assert_eq!(recommend(&trace, 30, 0.1), (30, false));
    }

    #[test]
    fn settles_after_transient() {
        let trace: Vec<(u32, f64)> = (2..=40).map(|r| (r, if r < 17 { r as f64 * 0.1 } else { 1.7 })).collect();
        assert_eq!(recommend(&trace, 40, 0.01), (17, true));
    }

    #[test]
    fn cv_of_constant_is_zero() {
        assert_eq!(coefficient_of_variation(&[2.0; 5]), 0.0);
        assert!((coefficient_of_variation(&[1.0, 3.0]) - 2f64.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn deterministic_scenario_recommends_minimum() {
        let mut cfg = ScenarioConfig::default();
        cfg.population.n_agents = 60;
        // Everyone satisfied and certain, so every agent repeats in every replication.
        cfg.population.sat_threshold = crate::dist::BoundedDist::Uniform { min: 0.01, max: 0.01 };
        cfg.population.uncertainty_avoidance = crate::dist::BoundedDist::Uniform { min: 0.0, max: 0.0 };
        let rep =
            cv_stabilization(&cfg, "n_repeat", 16, DEFAULT_TOL, &BatchOptions { years: Some(2), ..Default::default() })
                .unwrap();
        assert_eq!(rep.recommended, MIN_REPS);
        assert!(rep.stabilized);
    }

    #[test]
    fn rejects_small_max() {
        assert!(cv_stabilization(&ScenarioConfig::default(), "share_pub", 5, DEFAULT_TOL, &BatchOptions::default())
            .is_err());
    }
}
