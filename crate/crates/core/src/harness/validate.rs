//! Validation pipeline: a short many-replication share check and the
//! comparison of simulated motorcycle uptake with a Bass diffusion curve.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use super::batch::{run_batch, BatchOptions, RunResult};
use super::config::ScenarioConfig;
use super::export::export_results;
use crate::calibration::bass::{bass_curve, bass_fit, compare_trajectories, BassFit, BassParams, TrajectoryComparison};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryRow {
    pub year: u32,
    /// Motorcycles added since period 0 in the simulation, scaled to the commuter population.
    pub abm_new: f64,
    /// Adopters added since the base year on the reference curve.
    pub bass_new: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryCheck {
    pub source: &'static str,
    pub params: BassParams,
    pub origin_year: f64,
    pub fit: Option<BassFit>,
    pub rows: Vec<TrajectoryRow>,
    pub comparison: TrajectoryComparison,
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub short: RunResult,
    pub trajectory: Option<TrajectoryCheck>,
}

/// Runs the short protocol (`validation.reps` × `validation.periods`) and,
/// when a registry or configured curve is available, the trajectory comparison
/// over the full horizon.
pub fn run_validation(
    cfg: &ScenarioConfig,
    registry: Option<&[(f64, f64)]>,
    opts: &BatchOptions,
) -> Result<ValidationReport> {
    let short_opts = BatchOptions {
        reps: Some(cfg.validation.reps),
        years: Some(cfg.validation.periods),
        seed: opts.seed,
        jobs: opts.jobs,
    };
    let short = run_batch(cfg, &short_opts)?;

    let reference = match (registry, &cfg.validation.bass) {
        (Some(series), _) => {
            let fit = bass_fit(series)?;
            Some(("registry", fit.params, fit.origin_year, Some(fit)))
        }
        (None, Some(b)) => Some(("scenario", BassParams { p: b.p, q: b.q, m: b.m }, b.origin_year, None)),
        (None, None) => None,
    };
    let trajectory = match reference {
        None => None,
        Some((source, params, origin_year, fit)) => {
            let long = run_batch(cfg, opts)?;
            let last = long.last_period();
            let share = |p: u32| {
                long.interval("share_moto", p).map(|i| i.mean).ok_or_else(|| Error::Runtime("missing share".into()))
            };
            let s0 = share(0)?;
            let t0 = f64::from(cfg.validation.base_year) - origin_year;
            let n0 = bass_curve(&params, t0.max(0.0));
            let mut rows = Vec::new();
            for p in 1..=last {
                rows.push(TrajectoryRow {
                    year: cfg.validation.base_year + p,
                    abm_new: (share(p)? - s0) * cfg.validation.commuter_population,
                    bass_new: bass_curve(&params, (t0 + f64::from(p)).max(0.0)) - n0,
                });
            }
            let abm: Vec<f64> = rows.iter().map(|r| r.abm_new).collect();
            let bass: Vec<f64> = rows.iter().map(|r| r.bass_new).collect();
            let comparison = compare_trajectories(&abm, &bass)?;
            Some(TrajectoryCheck { source, params, origin_year, fit, rows, comparison })
        }
    };
    Ok(ValidationReport { short, trajectory })
}

impl ValidationReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let reps = self.short.replications.len();
        let _ = writeln!(s, "short protocol: {reps} replications x {} periods", self.short.last_period());
        let _ = writeln!(s, "{:>6} {:>22} {:>22} {:>22}", "period", "car", "motorcycle", "public");
        for p in 0..=self.short.last_period() {
            let _ = write!(s, "{p:>6}");
            for ind in ["share_car", "share_moto", "share_pub"] {
                if let Some(i) = self.short.interval(ind, p) {
                    let _ = write!(s, "   {:.3} [{:.3}, {:.3}]", i.mean, i.ci_low, i.ci_high);
                }
            }
            s.push('\n');
        }
        match &self.trajectory {
            None => {
                let _ =
                    writeln!(s, "\nno registry or [validation.bass] reference given; trajectory comparison skipped");
            }
            Some(t) => {
                let _ = writeln!(
                    s,
                    "\nBass reference ({}): p = {:.5}, q = {:.5}, m = {:.1}, t = 0 at {}",
                    t.source, t.params.p, t.params.q, t.params.m, t.origin_year
                );
                if let Some(f) = &t.fit {
                    let _ = writeln!(s, "fit rmse {:.3} over {} points", f.rmse, f.n_points);
                }
                let _ = writeln!(s, "{:>6} {:>14} {:>14}", "year", "abm_new", "bass_new");
                for r in &t.rows {
                    let _ = writeln!(s, "{:>6} {:>14.1} {:>14.1}", r.year, r.abm_new, r.bass_new);
                }
                let _ = writeln!(s, "RMSE {:.1}  MAPE {:.2}%", t.comparison.rmse, t.comparison.mape);
            }
        }
        s
    }

    /// Writes `validation.txt`, the short-protocol outputs under `short/` and,
    /// when available, `trajectory.csv`.
    pub fn export(&self, cfg: &ScenarioConfig, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let txt = dir.join("validation.txt");
        fs::write(&txt, self.to_text()).map_err(|e| Error::io(&txt, e))?;
        export_results(&self.short, cfg, &dir.join("short"))?;
        if let Some(t) = &self.trajectory {
            let path = dir.join("trajectory.csv");
            let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
            let mut w = csv::Writer::from_writer(file);
            for r in &t.rows {
                w.serialize(r).map_err(|e| Error::Runtime(format!("trajectory.csv: {e}")))?;
            }
            w.flush().map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::BassReference;

    fn small() -> ScenarioConfig {
        let mut cfg = ScenarioConfig::default();
        cfg.population.n_agents = 120;
        cfg.validation.reps = 4;
        cfg.validation.periods = 2;
        cfg
    }

    #[test]
    fn short_protocol_only_without_reference() {
        let rep = run_validation(&small(), None, &BatchOptions::default()).unwrap();
        assert_eq!(rep.short.replications.len(), 4);
        assert_eq!(rep.short.last_period(), 2);
        assert!(rep.trajectory.is_none());
        assert!(rep.to_text().contains("skipped"));
    }

    #[test]
    fn configured_curve_gives_comparison() {
        let mut cfg = small();
        cfg.validation.bass = Some(BassReference { p: 0.01, q: 0.3, m: 5e5, origin_year: 2006.0 });
        let opts = BatchOptions { reps: Some(3), years: Some(4), ..Default::default() };
        let rep = run_validation(&cfg, None, &opts).unwrap();
        let t = rep.trajectory.unwrap();
        assert_eq!(t.rows.len(), 4);
        assert_eq!(t.rows[0].year, 2023);
        assert!(t.rows.windows(2).all(|w| w[1].bass_new > w[0].bass_new));
        assert!(t.comparison.mape.is_finite());
    }

    #[test]
    fn registry_is_fitted() {
        let truth = BassParams { p: 0.02, q: 0.35, m: 8e5 };
        let reg: Vec<(f64, f64)> = (1..=17).map(|t| (2006.0 + t as f64, bass_curve(&truth, t as f64))).collect();
        let opts = BatchOptions { reps: Some(2), years: Some(3), ..Default::default() };
        let rep = run_validation(&small(), Some(&reg), &opts).unwrap();
        let t = rep.trajectory.as_ref().unwrap();
        assert_eq!(t.source, "registry");
        assert!(((t.params.q - 0.35) / 0.35).abs() < 1e-3);
        let dir = tempfile::tempdir().unwrap();
        rep.export(&small(), dir.path()).unwrap();
        assert!(dir.path().join("trajectory.csv").exists());
        assert!(dir.path().join("short").join("aggregate.csv").exists());
    }
}
