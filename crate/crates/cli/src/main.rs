//! `modeshift` command-line front end.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use modeshift::calibration::{
    bass_fit, cochran_sample_size, mnl_fit, read_registry, survey_from_population, survey_report, synthetic_registry,
    BassParams, ChoiceData, MnlOptions, SurveyTable,
};
use modeshift::harness::cv::DEFAULT_TOL;
use modeshift::harness::plot::read_aggregate;
use modeshift::harness::{
    cv_stabilization, export_results, export_sweep, plot_shares, run_batch, run_sweep, run_validation,
};
use modeshift::harness::{BatchOptions, PlotSpec, ScenarioConfig};
use modeshift::policy::parse_set_spec;
use modeshift::population::{synthesize_population, write_population_csv};
use modeshift::rng::{replication_seed, stream, Stream};
use modeshift::{Error, Result};

/// Name accepted in place of a scenario path for the built-in calibration.
const BUILTIN: &str = "cali-default";

#[derive(Parser)]
#[command(name = "modeshift", version, about = "Agent-based commuter mode-choice simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct BatchArgs {
    /// Replications (overrides simulation.reps).
    #[arg(long)]
    reps: Option<u32>,
    /// Master seed (overrides simulation.master_seed).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for replications.
    #[arg(long)]
    jobs: Option<usize>,
    /// Simulated years (overrides simulation.years).
    #[arg(long)]
    years: Option<u32>,
}

impl BatchArgs {
    fn options(&self) -> BatchOptions {
        BatchOptions { reps: self.reps, seed: self.seed, years: self.years, jobs: self.jobs }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write timeseries, aggregate and metadata files.
    Run {
        scenario: String,
        #[command(flatten)]
        batch: BatchArgs,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run the base case plus policy sets on common seeds.
    Sweep {
        scenario: String,
        /// Policy sets, e.g. `fare_free,frequency,security,fare_free+security,all`.
        #[arg(long)]
        policies: String,
        #[command(flatten)]
        batch: BatchArgs,
        #[arg(long, default_value = "sweep")]
        out: PathBuf,
    },
    /// Find the replication count at which an indicator's CV stabilises.
    CvCheck {
        scenario: String,
        #[arg(long, default_value = "share_pub")]
        indicator: String,
        #[arg(long, default_value_t = 100)]
        max_reps: u32,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[command(flatten)]
        batch: BatchArgs,
    },
    /// Fit a Bass curve to a `year,cumulative_count` registry.
    FitBass {
        registry: PathBuf,
        /// Write the fit as a `[validation.bass]` fragment.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit a multinomial logit to survey data.
    FitMnl {
        survey: PathBuf,
        #[arg(long)]
        choice: String,
        #[arg(long = "ref")]
        reference: String,
        /// Comma-separated covariate columns.
        #[arg(long, value_delimiter = ',', required = true)]
        vars: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Non-parametric tests and normalised weights from a survey.
    Stats {
        survey: PathBuf,
        /// Write test results and the weight fragment as TOML.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw mode shares with confidence bands from an aggregate.csv.
    Plot {
        aggregate: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        title: Option<String>,
        #[arg(long)]
        scenario: Option<String>,
    },
    /// Short replication check and Bass trajectory comparison.
    Validate {
        scenario: String,
        /// Registry to fit; otherwise `[validation.bass]` is used when present.
        #[arg(long)]
        registry: Option<PathBuf>,
        #[command(flatten)]
        batch: BatchArgs,
        #[arg(long, default_value = "validation")]
        out: PathBuf,
    },
    /// Survey sample size with finite-population correction.
    SampleSize {
        #[arg(long)]
        population: f64,
        #[arg(long, default_value_t = 1.96)]
        z: f64,
        #[arg(long, default_value_t = 0.05)]
        margin: f64,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
    },
    /// Print a scenario with every default filled in.
    ShowConfig { scenario: String },
    /// Dump one synthesised population as CSV.
    Population {
        scenario: String,
        /// Replication index whose population stream is used.
        #[arg(long, default_value_t = 0)]
        rep: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Write a demonstration survey.csv and registry.csv drawn from the model.
    Synth {
        scenario: String,
        #[arg(long, default_value_t = 400)]
        respondents: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "demo")]
        out: PathBuf,
    },
}

fn load(scenario: &str) -> Result<ScenarioConfig> {
    let path = Path::new(scenario);
    if scenario == BUILTIN && !path.exists() {
        return Ok(ScenarioConfig::default());
    }
    if !path.is_file() {
        return Err(Error::config("scenario", format!("`{scenario}` is not a readable file")));
    }
    ScenarioConfig::from_path(path)
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn open(path: &Path) -> Result<fs::File> {
    fs::File::open(path).map_err(|e| Error::io(path, e))
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run { scenario, batch, out } => {
            let cfg = load(&scenario)?;
            let result = run_batch(&cfg, &batch.options())?;
            let last = result.last_period();
            for ind in ["share_car", "share_moto", "share_pub"] {
                if let Some(i) = result.interval(ind, last) {
                    println!("{ind:<11} period {last:>2}: {:.4} [{:.4}, {:.4}]", i.mean, i.ci_low, i.ci_high);
                }
            }
            for p in export_results(&result, &cfg, &out)? {
                println!("wrote {}", p.display());
            }
        }
        Command::Sweep { scenario, policies, batch, out } => {
            let cfg = load(&scenario)?;
            let sets = parse_set_spec(&policies)?;
            let entries = run_sweep(&cfg, &sets, &batch.options())?;
            export_sweep(&entries, &out)?;
            let summary = out.join("summary.csv");
            print!("{}", fs::read_to_string(&summary).map_err(|e| Error::io(&summary, e))?);
        }
        Command::CvCheck { scenario, indicator, max_reps, tol, batch } => {
            let cfg = load(&scenario)?;
            let report = cv_stabilization(&cfg, &indicator, max_reps, tol, &batch.options())?;
            println!("reps,cv");
            for (r, cv) in &report.trace {
                println!("{r},{cv:.6}");
            }
            if !report.stabilized {
                eprintln!("warning: CV of {indicator} did not stabilise within {max_reps} replications");
            }
            println!("recommended replications: {}", report.recommended);
        }
        Command::FitBass { registry, out } => {
            let series = read_registry(open(&registry)?)?;
            let fit = bass_fit(&series)?;
            let BassParams { p, q, m } = fit.params;
            println!("p = {p:.6}\nq = {q:.6}\nm = {m:.2}\nrmse = {:.4} over {} points", fit.rmse, fit.n_points);
            println!("t = 0 at {}; peak adoption at t = {:.2}", fit.origin_year, fit.params.peak_time());
            if let Some(out) = out {
                let frag =
                    format!("[validation.bass]\np = {p}\nq = {q}\nm = {m}\norigin_year = {:?}\n", fit.origin_year);
                write(&out, &frag)?;
            }
        }
        Command::FitMnl { survey, choice, reference, vars, out } => {
            let data = ChoiceData::from_csv(open(&survey)?, &choice, &reference, &vars)?;
            let model = mnl_fit(&data, &MnlOptions::default())?;
            print!("{}", model.to_text());
            if let Some(out) = out {
                write(&out, &model.to_kv()?)?;
            }
        }
        Command::Stats { survey, out } => {
            let table = SurveyTable::from_csv(open(&survey)?)?;
            let report = survey_report(&table)?;
            print!("{}", report.to_text());
            if let Some(out) = out {
                write(&out, &report.to_kv()?)?;
            }
        }
        Command::Plot { aggregate, output, title, scenario } => {
            let points = read_aggregate(open(&aggregate)?)?;
            let svg = plot_shares(&points, &PlotSpec { title, scenario })?;
            write(&output, &svg)?;
            println!("wrote {}", output.display());
        }
        Command::Validate { scenario, registry, batch, out } => {
            let cfg = load(&scenario)?;
            let series = registry.map(|r| open(&r).and_then(read_registry)).transpose()?;
            let report = run_validation(&cfg, series.as_deref(), &batch.options())?;
            print!("{}", report.to_text());
            report.export(&cfg, &out)?;
        }
        Command::SampleSize { population, z, margin, p } => {
            println!("{}", cochran_sample_size(population, z, margin, p)?);
        }
        Command::ShowConfig { scenario } => print!("{}", load(&scenario)?.to_toml_string()?),
        Command::Population { scenario, rep, output } => {
            let cfg = load(&scenario)?;
            let rs = replication_seed(cfg.simulation.master_seed, rep);
            let agents = synthesize_population(&cfg.population, &mut stream(rs, Stream::Population))?;
            let mut buf = Vec::new();
            write_population_csv(&agents, &mut buf)?;
            write(&output, &String::from_utf8_lossy(&buf))?;
            println!("wrote {} agents to {}", agents.len(), output.display());
        }
        Command::Synth { scenario, respondents, seed, out } => {
            let mut cfg = load(&scenario)?;
            cfg.population.n_agents = respondents;
            cfg.validate()?;
            let rs = replication_seed(seed, 0);
            let agents = synthesize_population(&cfg.population, &mut stream(rs, Stream::Population))?;
            let survey = survey_from_population(&agents, &mut stream(rs, Stream::Dynamics));
            let mut buf = Vec::new();
            survey.write_csv(&mut buf)?;
            write(&out.join("survey.csv"), &String::from_utf8_lossy(&buf))?;
            let reference = BassParams { p: 0.012, q: 0.28, m: 1.2e6 };
            let mut reg = String::from("year,cumulative_count\n");
            for (year, count) in synthetic_registry(&reference, 2006, 17, 0.02, seed) {
                reg.push_str(&format!("{year},{count}\n"));
            }
            write(&out.join("registry.csv"), &reg)?;
            println!("wrote {} and {}", out.join("survey.csv").display(), out.join("registry.csv").display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
