//! Monte Carlo replication protocol and aggregation with confidence intervals.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::environment::{IndicatorSnapshot, Simulation, SimulationParts};
use crate::error::{Error, Result};
use crate::harness::config::ScenarioConfig;
use crate::network::build_network;
use crate::population::synthesize_population;
use crate::rng::{replication_seed, stream, Stream};

/// A named per-snapshot quantity reported in the outputs.
pub struct Indicator {
    pub name: &'static str,
    pub value: fn(&IndicatorSnapshot) -> f64,
}

/// Indicators in output column order.
pub const INDICATORS: [Indicator; 11] = [
    Indicator { name: "share_car", value: |s| s.shares[0] },
    Indicator { name: "share_moto", value: |s| s.shares[1] },
    Indicator { name: "share_pub", value: |s| s.shares[2] },
    Indicator { name: "avg_time_min", value: |s| s.avg_travel_time },
    Indicator { name: "avg_speed_kmh", value: |s| s.avg_speed },
    Indicator { name: "co2_kg", value: |s| s.co2_total },
    Indicator { name: "accidents_per_100k", value: |s| s.accidents_per_100k },
    Indicator { name: "n_repeat", value: |s| s.strategy_counts[0] as f64 },
    Indicator { name: "n_imitate", value: |s| s.strategy_counts[1] as f64 },
    Indicator { name: "n_inquire", value: |s| s.strategy_counts[2] as f64 },
    Indicator { name: "n_deliberate", value: |s| s.strategy_counts[3] as f64 },
];

pub fn indicator(name: &str) -> Option<&'static Indicator> {
    INDICATORS.iter().find(|i| i.name == name)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Replication {
    pub rep: u32,
    pub seed: u64,
    pub snapshots: Vec<IndicatorSnapshot>,
    pub runtime_ms: u128,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    pub period: u32,
    pub year: u32,
    pub indicator: &'static str,
    pub interval: Interval,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunResult {
    pub scenario: String,
    pub config_hash: String,
    pub master_seed: u64,
    pub replications: Vec<Replication>,
    pub aggregate: Vec<AggregateRow>,
}

impl RunResult {
    /// Aggregate interval for `indicator` at `period`.
    pub fn interval(&self, indicator: &str, period: u32) -> Option<Interval> {
        self.aggregate.iter().find(|r| r.period == period && r.indicator == indicator).map(|r| r.interval)
    }

    /// Per-replication values of `indicator` at `period`, in replication order.
    pub fn values(&self, indicator: &str, period: u32) -> Vec<f64> {
        let ind = self::indicator(indicator).expect("known indicator");
        self.replications
            .iter()
            .filter_map(|r| r.snapshots.iter().find(|s| s.period == period).map(ind.value))
            .collect()
    }

    pub fn last_period(&self) -> u32 {
        self.replications.first().and_then(|r| r.snapshots.last()).map_or(0, |s| s.period)
    }
}

/// Overrides applied on top of the scenario's `[simulation]` section.
#[derive(Debug, Clone, Copy, Default)]
pub struct BatchOptions {
    pub reps: Option<u32>,
    pub seed: Option<u64>,
    pub years: Option<u32>,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
}

/// Runs one replication.
pub fn run_replication(cfg: &ScenarioConfig, rep: u32, seed: u64, years: u32) -> Result<Replication> {
    let start = Instant::now();
    let agents = synthesize_population(&cfg.population, &mut stream(seed, Stream::Population))?;
    let graph = build_network(&agents, &cfg.network, &mut stream(seed, Stream::Network))?;
    let parts = SimulationParts {
        agents,
        graph,
        modes: cfg.modes.clone(),
        env: cfg.environment.clone(),
        consumat: cfg.consumat.clone(),
        policies: cfg.policies.clone(),
    };
    let mut sim = Simulation::new(parts, stream(seed, Stream::Dynamics))?;
    let snapshots = sim.run(years);
    Ok(Replication { rep, seed, snapshots, runtime_ms: start.elapsed().as_millis() })
}

fn guarded(cfg: &ScenarioConfig, rep: u32, seed: u64, years: u32) -> Result<Replication> {
    match catch_unwind(AssertUnwindSafe(|| run_replication(cfg, rep, seed, years))) {
        Ok(result) => result,
        Err(panic) => {
            let message = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "replication panicked".to_string());
            Err(Error::Replication { seed, message })
        }
    }
}

/// Runs the replications listed in `order` (any permutation of rep indices)
/// and aggregates them. The result depends only on the set of indices.
pub fn run_batch_in_order(cfg: &ScenarioConfig, opts: &BatchOptions, order: &[u32]) -> Result<RunResult> {
    cfg.validate()?;
    let master_seed = opts.seed.unwrap_or(cfg.simulation.master_seed);
    let years = opts.years.unwrap_or(cfg.simulation.years);
    let work = || -> Result<Vec<Replication>> {
        order.par_iter().map(|&rep| guarded(cfg, rep, replication_seed(master_seed, rep as u64), years)).collect()
    };
    let mut replications = match opts.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build()
            .map_err(|e| Error::Runtime(format!("thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };
    replications.sort_by_key(|r| r.rep);
    let aggregate = aggregate(&replications);
    Ok(RunResult { scenario: cfg.name.clone(), config_hash: cfg.hash(), master_seed, replications, aggregate })
}

/// Runs `reps` independent replications of `cfg`.
pub fn run_batch(cfg: &ScenarioConfig, opts: &BatchOptions) -> Result<RunResult> {
    let reps = opts.reps.unwrap_or(cfg.simulation.reps);
    if reps == 0 {
        return Err(Error::config("simulation.reps", "must be at least 1"));
    }
    let order: Vec<u32> = (0..reps).collect();
    run_batch_in_order(cfg, opts, &order)
}

/// Mean and two-sided 95% t-interval; zero width when all values coincide.
pub fn mean_ci(values: &[f64]) -> Interval {
    let n = values.len();
    if n == 0 {
        return Interval { mean: f64::NAN, ci_low: f64::NAN, ci_high: f64::NAN };
    }
    if values.iter().all(|&v| v == values[0]) {
        let v = values[0];
        return Interval { mean: v, ci_low: v, ci_high: v };
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let half = t_quantile(0.975, (n - 1) as f64) * (var / n as f64).sqrt();
    Interval { mean, ci_low: mean - half, ci_high: mean + half }
}

pub fn t_quantile(p: f64, df: f64) -> f64 {
    StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom").inverse_cdf(p)
}

/// Per-period interval for every indicator, over replications in rep order.
pub fn aggregate(replications: &[Replication]) -> Vec<AggregateRow> {
    let mut sorted: Vec<&Replication> = replications.iter().collect();
    sorted.sort_by_key(|r| r.rep);
    let Some(first) = sorted.first() else { return Vec::new() };
    let mut rows = Vec::new();
    for (k, snap) in first.snapshots.iter().enumerate() {
        for ind in &INDICATORS {
            let values: Vec<f64> = sorted.iter().filter_map(|r| r.snapshots.get(k)).map(|s| (ind.value)(s)).collect();
            rows.push(AggregateRow {
                period: snap.period,
                year: snap.year,
                indicator: ind.name,
                interval: mean_ci(&values),
            });
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t_interval_matches_tables() {
        assert!((t_quantile(0.975, 9.0) - 2.262157).abs() < 1e-5);
        assert!((t_quantile(0.975, 79.0) - 1.990450).abs() < 1e-5);
        let ci = mean_ci(&[1.0, 2.0, 3.0, 4.0]);
        let half = 3.182446 * (1.666_666_666_7f64 / 4.0).sqrt();
        assert!((ci.mean - 2.5).abs() < 1e-12);
        assert!((ci.ci_high - 2.5 - half).abs() < 1e-5);
    }

    #[test]
    fn constant_sample_has_zero_width() {
        let ci = mean_ci(&[0.3; 12]);
        assert_eq!(ci.ci_low, ci.ci_high);
        assert!((ci.mean - 0.3).abs() < 1e-15);
    }

    #[test]
    fn small_batch_runs() {
        let mut cfg = ScenarioConfig::default();
        cfg.population.n_agents = 150;
        let opts = BatchOptions { reps: Some(3), years: Some(2), ..Default::default() };
        let r = run_batch(&cfg, &opts).unwrap();
        assert_eq!(r.replications.len(), 3);
        assert_eq!(r.last_period(), 2);
        assert_eq!(r.aggregate.len(), 3 * INDICATORS.len());
        assert_eq!(r.values("share_pub", 2).len(), 3);
    }
}
