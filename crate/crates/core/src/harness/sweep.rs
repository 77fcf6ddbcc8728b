//! Policy sweeps on common random numbers.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::batch::{run_batch, BatchOptions, RunResult};
use super::config::ScenarioConfig;
use super::export::export_results;
use crate::calibration::stats::paired_t_test;
use crate::error::{Error, Result};
use crate::policy::{combine, PolicyKind, PolicyScenario};

#[derive(Debug, Clone)]
pub struct SweepEntry {
    pub scenario: PolicyScenario,
    pub config: ScenarioConfig,
    pub result: RunResult,
}

/// Runs every requested policy set on the same seeds. The base case is
/// always included first so gains can be measured against it.
pub fn run_sweep(cfg: &ScenarioConfig, sets: &[Vec<PolicyKind>], opts: &BatchOptions) -> Result<Vec<SweepEntry>> {
    let mut requested = vec![Vec::new()];
    requested.extend(sets.iter().filter(|s| !s.is_empty()).cloned());
    let mut out = Vec::new();
    for sc in combine(&requested, &cfg.policies) {
        if out.iter().any(|e: &SweepEntry| e.scenario.name == sc.name) {
            continue;
        }
        let mut c = cfg.clone();
        c.name = sc.name.clone();
        c.policies = sc.policies.clone();
        let result = run_batch(&c, opts)?;
        out.push(SweepEntry { scenario: sc, config: c, result });
    }
    Ok(out)
}

pub const SUMMARY_HEADER: [&str; 10] = [
    "scenario",
    "share_car",
    "share_moto",
    "share_pub",
    "pub_ci_low",
    "pub_ci_high",
    "gain_pub",
    "p_gain",
    "co2_kg",
    "accidents_per_100k",
];

/// Terminal-period summary; `gain_pub` and `p_gain` come from a one-sided
/// paired t-test of each scenario's public share against the base case.
pub fn write_summary<W: Write>(entries: &[SweepEntry], out: W) -> Result<()> {
    let base = entries.first().ok_or_else(|| Error::Runtime("empty sweep".into()))?;
    let last = base.result.last_period();
    let base_pub = base.result.values("share_pub", last);
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::Runtime(format!("summary.csv: {e}"));
    w.write_record(SUMMARY_HEADER).map_err(err)?;
    for e in entries {
        let get = |ind: &str| e.result.interval(ind, last).ok_or_else(|| Error::Runtime(format!("missing {ind}")));
        let pub_ci = get("share_pub")?;
        let (gain, p) = if e.scenario.policies.is_empty() || base_pub.len() < 2 {
            (0.0, 1.0)
        } else {
            let t = paired_t_test(&e.result.values("share_pub", last), &base_pub)?;
            (t.mean_diff, t.p_greater)
        };
        w.write_record([
            e.scenario.name.clone(),
            get("share_car")?.mean.to_string(),
            get("share_moto")?.mean.to_string(),
            pub_ci.mean.to_string(),
            pub_ci.ci_low.to_string(),
            pub_ci.ci_high.to_string(),
            gain.to_string(),
            p.to_string(),
            get("co2_kg")?.mean.to_string(),
            get("accidents_per_100k")?.mean.to_string(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| Error::Runtime(e.to_string()))
}

/// One output directory per scenario plus `summary.csv` at the top.
pub fn export_sweep(entries: &[SweepEntry], dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for e in entries {
        export_results(&e.result, &e.config, &dir.join(&e.scenario.name))?;
    }
    let path = dir.join("summary.csv");
    let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    write_summary(entries, file)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::parse_set_spec;

    #[test]
    fn sweep_always_starts_with_base() {
        let mut cfg = ScenarioConfig::default();
        cfg.population.n_agents = 100;
        let sets = parse_set_spec("fare_free,security").unwrap();
        let opts = BatchOptions { reps: Some(2), years: Some(1), ..Default::default() };
        let entries = run_sweep(&cfg, &sets, &opts).unwrap();
        let names: Vec<&str> = entries.iter().map(|e| e.scenario.name.as_str()).collect();
        assert_eq!(names, ["base", "fare_free", "security"]);
        let dir = tempfile::tempdir().unwrap();
        export_sweep(&entries, dir.path()).unwrap();
        let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
        assert_eq!(summary.lines().count(), 4);
        assert!(dir.path().join("security").join("aggregate.csv").exists());
    }
}
