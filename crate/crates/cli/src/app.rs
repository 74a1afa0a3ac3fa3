//! Command-line parsing and dispatch.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use hetnet_coop::config::Config;
use hetnet_coop::mcsim::McSettings;
use hetnet_coop::model::{Mode, Strategy};
use serde::{Deserialize, Serialize};

use crate::output::{sidecar_path, write_csv};
use crate::sweep::{run_sweep, Engine, Metric, SweepSpec, Variable};
use crate::validate::{validate, ValidateOptions};
use crate::CliError;

pub const DEFAULT_TRIALS: usize = 10_000;

#[derive(Parser, Debug)]
#[command(name = "hetnet-coop", version, about = "Coverage and rate of two-tier networks with small-cell cooperation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Coverage probability versus a swept variable (the SINR threshold by default).
    CoverageSweep(SweepArgs),
    /// Mean rate versus a swept variable (the SINR threshold by default).
    RateSweep(SweepArgs),
    /// Coverage versus the small-to-macro bias ratio.
    BiasSweep(SweepArgs),
    /// Coverage versus the small-to-macro density ratio.
    DensitySweep(SweepArgs),
    /// Compare the analytic and Monte Carlo engines on the configured scenario.
    Validate(ValidateArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::CoverageSweep(_) => "coverage-sweep",
            Command::RateSweep(_) => "rate-sweep",
            Command::BiasSweep(_) => "bias-sweep",
            Command::DensitySweep(_) => "density-sweep",
            Command::Validate(_) => "validate",
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// Scenario file (TOML); defaults to the reference deployment.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// CSV output path; the resolved configuration goes to `<out>.resolved.toml`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Comma-separated subset of analytic,mc.
    #[arg(long, value_delimiter = ',')]
    pub engines: Option<Vec<Engine>>,
    /// Worker threads for Monte Carlo trials; 0 picks one per core.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// threshold_db, bias_ratio, density_ratio or power_macro_dbm.
    #[arg(long)]
    pub variable: Option<Variable>,
    /// `start:stop:step` or a comma-separated list.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Comma-separated subset of SISO,SUBF,SDMA.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    pub strategies: Option<Vec<Strategy>>,
    /// Comma-separated subset of noncooperative,cooperative.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    pub modes: Option<Vec<Mode>>,
    /// SINR threshold for sweeps over other variables.
    #[arg(long, allow_hyphen_values = true)]
    pub threshold_db: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Adds antennas to the analytic scenario only (negative control).
    #[arg(long, hide = true, default_value_t = 0)]
    pub corrupt_delta: u32,
}

/// Run settings; stored as the `[run]` table of a resolved file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<String>,
    pub variable: Option<Variable>,
    pub grid: Option<Vec<f64>>,
    pub strategies: Option<Vec<Strategy>>,
    pub modes: Option<Vec<Mode>>,
    pub engines: Option<Vec<Engine>>,
    pub trials: Option<usize>,
    pub workers: Option<usize>,
    pub threshold_db: Option<f64>,
}

/// Parses `start:stop:step` or `a,b,c`.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = |m: String| CliError::Config(format!("grid `{text}`: {m}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|e| bad(e.to_string()));
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if !(step > 0.0 && stop >= start) {
                return Err(bad("need step > 0 and stop >= start".into()));
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize;
            Ok((0..=n).map(|i| start + i as f64 * step).collect())
        }
        [_] => text.split(',').map(num).collect(),
        _ => Err(bad("expected start:stop:step or a comma-separated list".into())),
    }
}

fn load_config(path: Option<&Path>) -> Result<(Config, RunConfig), CliError> {
    let Some(path) = path else {
        return Ok((Config::default(), RunConfig::default()));
    };
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| CliError::Config(format!("{}: {e}", path.display())))?;
    let run = match table.remove("run") {
        Some(v) => v
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Config(format!("{}: [run]: {e}", path.display())))?,
        None => RunConfig::default(),
    };
    let cfg = Config::from_table(table).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Ok((cfg, run))
}

fn resolved_toml(cfg: &Config, run: &RunConfig) -> String {
    let mut table = toml::Table::try_from(cfg).expect("configs serialize");
    table.insert("run".into(), toml::Value::try_from(run).expect("run settings serialize"));
    toml::to_string(&table).expect("tables serialize")
}

fn mc_settings(cfg: &Config, trials: usize, workers: usize) -> Result<McSettings, CliError> {
    let window = cfg.window().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(McSettings::new(trials, cfg.scenario.seed)
        .with_workers(workers)
        .with_window(window))
}

struct Prepared {
    cfg: Config,
    run: RunConfig,
    out: PathBuf,
}

fn prepare(name: &str, common: &CommonArgs) -> Result<Prepared, CliError> {
    let (mut cfg, mut run) = load_config(common.config.as_deref())?;
    if let Some(seed) = common.seed {
        cfg.scenario.seed = seed;
    }
    run.command = Some(name.to_string());
    run.trials = Some(common.trials.or(run.trials).unwrap_or(DEFAULT_TRIALS));
    run.workers = Some(common.workers.or(run.workers).unwrap_or(0));
    run.engines = Some(
        common
            .engines
            .clone()
            .or(run.engines.take())
            .unwrap_or_else(|| vec![Engine::Analytic, Engine::Mc]),
    );
    let out = common.out.clone().unwrap_or_else(|| PathBuf::from(format!("{name}.csv")));
    Ok(Prepared { cfg, run, out })
}

fn sweep_spec(command: &Command, args: &SweepArgs, p: &mut Prepared) -> Result<SweepSpec, CliError> {
    let (fixed, metric) = match command {
        Command::BiasSweep(_) => (Some(Variable::BiasRatio), Metric::Coverage),
        Command::DensitySweep(_) => (Some(Variable::DensityRatio), Metric::Coverage),
        Command::RateSweep(_) => (None, Metric::Rate),
        _ => (None, Metric::Coverage),
    };
    let run = &mut p.run;
    let variable = match (fixed, args.variable) {
        (Some(f), Some(v)) if f != v => {
            return Err(CliError::Config(format!("{} always sweeps {f}", command.name())));
        }
        (Some(f), _) => f,
        (None, v) => v.or(run.variable).unwrap_or(Variable::ThresholdDb),
    };
    run.variable = Some(variable);
    run.grid = Some(match &args.grid {
        Some(g) => parse_grid(g)?,
        None => run.grid.take().unwrap_or_else(|| variable.default_grid()),
    });
    run.strategies = Some(args.strategies.clone().or(run.strategies.take()).unwrap_or_else(|| Strategy::ALL.to_vec()));
    run.modes = Some(args.modes.clone().or(run.modes.take()).unwrap_or_else(|| Mode::ALL.to_vec()));
    run.threshold_db = Some(args.threshold_db.or(run.threshold_db).unwrap_or(0.0));
    let spec = SweepSpec {
        variable,
        grid: run.grid.clone().unwrap_or_default(),
        metric,
        strategies: run.strategies.clone().unwrap_or_default(),
        modes: run.modes.clone().unwrap_or_default(),
        engines: run.engines.clone().unwrap_or_default(),
        threshold_db: run.threshold_db.unwrap_or_default(),
        mc: mc_settings(&p.cfg, run.trials.unwrap_or_default(), run.workers.unwrap_or_default())?,
    };
    spec.validate()?;
    Ok(spec)
}

fn write_outputs(p: &Prepared, rows: &[crate::sweep::Row]) -> Result<(), CliError> {
    let file = fs::File::create(&p.out).map_err(|e| CliError::Config(format!("cannot create {}: {e}", p.out.display())))?;
    write_csv(rows, std::io::BufWriter::new(file))?;
    fs::write(sidecar_path(&p.out), resolved_toml(&p.cfg, &p.run))?;
    Ok(())
}

/// Runs one parsed command and returns the process exit status.
pub fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    match try_execute(cli, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn try_execute(cli: &Cli, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let command = &cli.command;
    match command {
        Command::Validate(args) => {
            let mut p = prepare(command.name(), &args.common)?;
            let sc = p.cfg.scenario().map_err(|e| CliError::Config(e.to_string()))?;
            let mc = mc_settings(&p.cfg, p.run.trials.unwrap_or_default(), p.run.workers.unwrap_or_default())?;
            let report = validate(
                &sc,
                &ValidateOptions {
                    mc,
                    analytic_delta_offset: args.corrupt_delta,
                },
            )?;
            p.run.engines = Some(vec![Engine::Analytic, Engine::Mc]);
            write_outputs(&p, &report.rows())?;
            writeln!(stdout, "{report}")?;
            Ok(if report.passed() { 0 } else { 1 })
        }
        Command::CoverageSweep(args) | Command::RateSweep(args) | Command::BiasSweep(args) | Command::DensitySweep(args) => {
            let mut p = prepare(command.name(), &args.common)?;
            let spec = sweep_spec(command, args, &mut p)?;
            let sc = p.cfg.scenario().map_err(|e| CliError::Config(e.to_string()))?;
            let rows = run_sweep(&spec, &sc)?;
            write_outputs(&p, &rows)?;
            let failed = rows.iter().filter(|r| r.error.is_some()).count();
            writeln!(stdout, "wrote {} rows to {} ({failed} failed cells)", rows.len(), p.out.display())?;
            Ok(0)
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli, stdout, stderr),
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() {
                write!(stderr, "{e}")
            } else {
                write!(stdout, "{e}")
            };
            code
        }
    }
}
