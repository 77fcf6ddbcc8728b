use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn modeshift(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_modeshift")).args(args).current_dir(cwd).output().expect("binary runs")
}

fn small_scenario(dir: &Path) -> String {
    let path = dir.join("small.toml");
    fs::write(&path, "name = \"small\"\n[population]\nn_agents = 150\n[simulation]\nyears = 3\nreps = 4\n").unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn run_writes_outputs_and_plot_reads_them() {
    let dir = tempfile::tempdir().unwrap();
    let sc = small_scenario(dir.path());
    let out = modeshift(&["run", &sc, "--out", "res", "--seed", "9"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["timeseries.csv", "aggregate.csv", "meta.json", "scenario.toml"] {
        assert!(dir.path().join("res").join(f).exists(), "{f}");
    }
    let ts = fs::read_to_string(dir.path().join("res/timeseries.csv")).unwrap();
    assert_eq!(ts.lines().count(), 1 + 4 * 4);

    let out = modeshift(&["plot", "res/aggregate.csv", "-o", "fig.svg"], dir.path());
    assert!(out.status.success());
    let svg = fs::read_to_string(dir.path().join("fig.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 3);
}

#[test]
fn same_seed_gives_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let sc = small_scenario(dir.path());
    for d in ["a", "b"] {
        assert!(modeshift(&["run", &sc, "--out", d, "--jobs", "2"], dir.path()).status.success());
    }
    for f in ["timeseries.csv", "aggregate.csv"] {
        let a = fs::read(dir.path().join("a").join(f)).unwrap();
        let b = fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.toml"), "[population]\nn_agentz = 3\n").unwrap();
    let out = modeshift(&["run", "bad.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("population.n_agentz"));
    assert_eq!(modeshift(&["run", "missing.toml"], dir.path()).status.code(), Some(2));
    assert_eq!(modeshift(&["sweep", "cali-default", "--policies", "teleport"], dir.path()).status.code(), Some(2));
}

#[test]
fn data_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("reg.csv"), "year,cumulative_count\n2020,10\n2021,5\n2022,20\n2023,30\n").unwrap();
    let out = modeshift(&["fit-bass", "reg.csv"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    fs::write(dir.path().join("agg.csv"), "scenario,period,year,indicator,mean,ci_low,ci_high\n").unwrap();
    assert_eq!(modeshift(&["plot", "agg.csv", "-o", "x.svg"], dir.path()).status.code(), Some(3));
    assert!(!dir.path().join("x.svg").exists());
}

#[test]
fn synthetic_inputs_feed_the_calibration_commands() {
    let dir = tempfile::tempdir().unwrap();
    assert!(modeshift(&["synth", "cali-default", "--out", "demo"], dir.path()).status.success());

    let out = modeshift(&["stats", "demo/survey.csv", "--out", "stats.toml"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let frag = fs::read_to_string(dir.path().join("stats.toml")).unwrap();
    assert!(frag.contains("[population.weights"));

    let out = modeshift(&["fit-bass", "demo/registry.csv", "--out", "bass.toml"], dir.path());
    assert!(out.status.success());
    assert!(fs::read_to_string(dir.path().join("bass.toml")).unwrap().contains("[validation.bass]"));

    let args = ["fit-mnl", "demo/survey.csv", "--choice", "mode", "--ref", "public", "--vars", "income_m,female"];
    let out = modeshift(&args, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("car:income_m"));
}

#[test]
fn sample_size_and_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let out = modeshift(&["sample-size", "--population", "2200000"], dir.path());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "385");
    let out = modeshift(&["show-config", "cali-default"], dir.path());
    assert!(String::from_utf8_lossy(&out.stdout).contains("[simulation]"));
}

#[test]
fn sweep_and_validate_run_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let sc = small_scenario(dir.path());
    let out = modeshift(
        &["sweep", &sc, "--policies", "fare_free,fare_free+security", "--reps", "3", "--out", "sw"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read_to_string(dir.path().join("sw/summary.csv")).unwrap().lines().count(), 4);

    assert!(modeshift(&["synth", "cali-default", "--out", "demo"], dir.path()).status.success());
    let out = modeshift(&["validate", &sc, "--registry", "demo/registry.csv", "--out", "val"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("val/trajectory.csv").exists());

    let out = modeshift(&["cv-check", &sc, "--max-reps", "12"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("recommended replications"));
}
