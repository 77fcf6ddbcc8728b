//! CSV and JSON emission of batch results.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::batch::{RunResult, INDICATORS};
use super::config::ScenarioConfig;
use crate::error::{Error, Result};

pub const TIMESERIES_HEADER: [&str; 15] = [
    "scenario",
    "rep",
    "period",
    "year",
    "share_car",
    "share_moto",
    "share_pub",
    "avg_time_min",
    "avg_speed_kmh",
    "co2_kg",
    "accidents_per_100k",
    "n_repeat",
    "n_imitate",
    "n_inquire",
    "n_deliberate",
];

pub const AGGREGATE_HEADER: [&str; 7] = ["scenario", "period", "year", "indicator", "mean", "ci_low", "ci_high"];

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| Error::Runtime(format!("writing {}: {e}", path.display()))
}

/// One row per (replication, period), columns as in [`TIMESERIES_HEADER`].
pub fn write_timeseries<W: Write>(result: &RunResult, out: W) -> Result<()> {
    let path = Path::new("timeseries.csv");
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TIMESERIES_HEADER).map_err(csv_err(path))?;
    for rep in &result.replications {
        for s in &rep.snapshots {
            let mut rec = vec![result.scenario.clone(), rep.rep.to_string(), s.period.to_string(), s.year.to_string()];
            rec.extend(INDICATORS[..7].iter().map(|ind| (ind.value)(s).to_string()));
            rec.extend(s.strategy_counts.iter().map(usize::to_string));
            w.write_record(&rec).map_err(csv_err(path))?;
        }
    }
    w.flush().map_err(|e| Error::Runtime(e.to_string()))
}

/// Long format: one row per (period, indicator).
pub fn write_aggregate<W: Write>(result: &RunResult, out: W) -> Result<()> {
    let path = Path::new("aggregate.csv");
    let mut w = csv::Writer::from_writer(out);
    w.write_record(AGGREGATE_HEADER).map_err(csv_err(path))?;
    for row in &result.aggregate {
        w.write_record([
            result.scenario.clone(),
            row.period.to_string(),
            row.year.to_string(),
            row.indicator.to_string(),
            row.interval.mean.to_string(),
            row.interval.ci_low.to_string(),
            row.interval.ci_high.to_string(),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| Error::Runtime(e.to_string()))
}

#[derive(Debug, Serialize)]
struct ReplicationMeta {
    rep: u32,
    seed: u64,
    runtime_ms: u128,
}

#[derive(Debug, Serialize)]
struct Meta<'a> {
    scenario: &'a str,
    config_hash: &'a str,
    master_seed: u64,
    reps: usize,
    periods: u32,
    replications: Vec<ReplicationMeta>,
    versions: Versions,
}

#[derive(Debug, Serialize)]
struct Versions {
    modeshift: &'static str,
    output_format: u32,
}

pub fn meta_json(result: &RunResult) -> Result<String> {
    let meta = Meta {
        scenario: &result.scenario,
        config_hash: &result.config_hash,
        master_seed: result.master_seed,
        reps: result.replications.len(),
        periods: result.last_period(),
        replications: result
            .replications
            .iter()
            .map(|r| ReplicationMeta { rep: r.rep, seed: r.seed, runtime_ms: r.runtime_ms })
            .collect(),
        versions: Versions { modeshift: env!("CARGO_PKG_VERSION"), output_format: 1 },
    };
    serde_json::to_string_pretty(&meta).map_err(|e| Error::Runtime(e.to_string()))
}

fn create(path: &Path) -> Result<fs::File> {
    fs::File::create(path).map_err(|e| Error::io(path, e))
}

/// Writes `timeseries.csv`, `aggregate.csv`, `meta.json` and the resolved
/// `scenario.toml` into `dir`, creating it if needed.
pub fn export_results(result: &RunResult, cfg: &ScenarioConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let ts = dir.join("timeseries.csv");
    write_timeseries(result, create(&ts)?)?;
    let agg = dir.join("aggregate.csv");
    write_aggregate(result, create(&agg)?)?;
    let meta = dir.join("meta.json");
    fs::write(&meta, meta_json(result)? + "\n").map_err(|e| Error::io(&meta, e))?;
    let scen = dir.join("scenario.toml");
    fs::write(&scen, cfg.to_toml_string()?).map_err(|e| Error::io(&scen, e))?;
    Ok(vec![ts, agg, meta, scen])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::batch::{run_batch, BatchOptions};

    fn small() -> (ScenarioConfig, RunResult) {
        let mut cfg = ScenarioConfig::default();
        cfg.population.n_agents = 120;
        let r = run_batch(&cfg, &BatchOptions { reps: Some(3), years: Some(2), ..Default::default() }).unwrap();
        (cfg, r)
    }

    #[test]
    fn timeseries_header_and_row_count() {
        let (_, r) = small();
        let mut buf = Vec::new();
        write_timeseries(&r, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), TIMESERIES_HEADER.join(","));
        assert_eq!(lines.count(), 3 * 3);
    }

    #[test]
    fn export_writes_all_files() {
        let (cfg, r) = small();
        let dir = tempfile::tempdir().unwrap();
        let files = export_results(&r, &cfg, dir.path()).unwrap();
        assert_eq!(files.len(), 4);
        let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(&files[2]).unwrap()).unwrap();
        assert_eq!(meta["config_hash"], cfg.hash());
        assert_eq!(meta["replications"].as_array().unwrap().len(), 3);
        let back = ScenarioConfig::from_path(&files[3]).unwrap();
        assert_eq!(back, cfg);
    }
}
