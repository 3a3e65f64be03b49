//! `splinv`: simulate signals, reconstruct them from measurements, run experiments.

mod commands;
mod config;
mod data;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use spline_inverse::experiments::ExperimentConfig;
use spline_inverse::signals::NoiseMode;
use spline_inverse::Operator;

use config::{load_config_file, Measure, Method, ModeArg, Process, ReconstructConfig, RunConfig};
use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "splinv", version, about = "Spline reconstruction of 1-D signals from linear measurements")]
struct Cli {
    /// Master random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print progress to stderr.
    #[arg(long, short, global = true)]
    verbose: bool,
    /// TOML configuration file; flags take precedence over its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a ground-truth signal and optionally measure it.
    Simulate(SimulateArgs),
    /// Reconstruct a signal from a measurement file.
    Reconstruct(ReconstructArgs),
    /// Run a batch experiment.
    Experiment {
        #[command(subcommand)]
        which: ExperimentCommand,
    },
}

#[derive(Subcommand, Debug)]
enum ExperimentCommand {
    /// TV versus L2 recovery from random Fourier samples.
    Table1(Table1Args),
}

fn parse_operator(s: &str) -> Result<Operator, String> {
    s.parse::<Operator>().map_err(|e| e.to_string())
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    process: Option<Process>,
    #[arg(long, value_parser = parse_operator)]
    operator: Option<Operator>,
    #[arg(long)]
    impulses: Option<usize>,
    #[arg(long)]
    rate: Option<f64>,
    #[arg(long)]
    amplitude_std: Option<f64>,
    #[arg(long)]
    std: Option<f64>,
    #[arg(long)]
    grid_step: Option<f64>,
    #[arg(long)]
    domain: Option<f64>,
    #[arg(long)]
    dense_points: Option<usize>,
    /// Also write `measurements.json` with this measurement model.
    #[arg(long, value_enum)]
    measure: Option<Measure>,
    /// Number of samples or pulsations.
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    omega_max: Option<f64>,
    #[arg(long)]
    snr_db: Option<f64>,
}

#[derive(Args, Debug)]
struct ReconstructArgs {
    /// Measurement JSON file.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_enum)]
    method: Option<Method>,
    #[arg(long, value_parser = parse_operator)]
    operator: Option<Operator>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long)]
    grid_n: Option<usize>,
    #[arg(long)]
    grid_step: Option<f64>,
    #[arg(long)]
    domain: Option<f64>,
    #[arg(long)]
    eval_points: Option<usize>,
    #[arg(long)]
    eps_rel: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Write the system matrices to `matrices.json`.
    #[arg(long)]
    dump_matrices: bool,
    /// Write the FISTA objective per iteration to `fista_trace.csv`.
    #[arg(long)]
    fista_trace: bool,
}

#[derive(Args, Debug)]
struct Table1Args {
    #[arg(long)]
    realizations: Option<usize>,
    #[arg(long)]
    omega_max: Option<f64>,
    #[arg(long)]
    noisy_snr_db: Option<f64>,
    /// Skip the per-cell curve files.
    #[arg(long)]
    no_curves: bool,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

/// Merges the configuration file, the flags and the defaults.
fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let file = match &cli.config {
        Some(path) => load_config_file(path)?,
        None => RunConfig::default(),
    };
    let mut run = RunConfig {
        simulate: None,
        reconstruct: None,
        experiment: None,
        ..file.clone()
    };
    set(&mut run.seed, cli.seed);
    set(&mut run.out, cli.out.clone());
    run.verbose |= cli.verbose;

    match &cli.command {
        Command::Simulate(a) => {
            let mut s = file.simulate.unwrap_or_default();
            set(&mut s.process, a.process);
            set(&mut s.operator, a.operator);
            set(&mut s.impulses, a.impulses);
            if a.rate.is_some() {
                s.rate = a.rate;
            }
            set(&mut s.amplitude_std, a.amplitude_std);
            set(&mut s.std, a.std);
            set(&mut s.grid_step, a.grid_step);
            set(&mut s.domain, a.domain);
            set(&mut s.dense_points, a.dense_points);
            set(&mut s.measure, a.measure);
            set(&mut s.count, a.count);
            set(&mut s.omega_max, a.omega_max);
            if a.snr_db.is_some() {
                s.snr_db = a.snr_db;
                s.noise_mode = NoiseMode::Exact;
            }
            s.check()?;
            run.simulate = Some(s);
        }
        Command::Reconstruct(a) => {
            let mut r: ReconstructConfig = file.reconstruct.unwrap_or_default();
            if a.input.is_some() {
                r.input = a.input.clone();
            }
            set(&mut r.method, a.method);
            set(&mut r.operator, a.operator);
            if a.lambda.is_some() {
                r.lambda = a.lambda;
            }
            set(&mut r.mode, a.mode.map(Into::into));
            if a.grid_n.is_some() {
                r.grid_n = a.grid_n;
            }
            if a.grid_step.is_some() {
                r.grid_step = a.grid_step;
            }
            if a.domain.is_some() {
                r.domain = a.domain;
            }
            set(&mut r.eval_points, a.eval_points);
            set(&mut r.fista.eps_rel, a.eps_rel);
            set(&mut r.fista.max_iter, a.max_iter);
            r.dump_matrices |= a.dump_matrices;
            r.fista_trace |= a.fista_trace;
            r.check()?;
            run.reconstruct = Some(r);
        }
        Command::Experiment {
            which: ExperimentCommand::Table1(a),
        } => {
            let mut e: ExperimentConfig = file.experiment.unwrap_or_default();
            e.seed = run.seed;
            set(&mut e.realizations, a.realizations);
            set(&mut e.omega_max, a.omega_max);
            if a.noisy_snr_db.is_some() {
                e.noisy_snr_db = a.noisy_snr_db;
            }
            if a.no_curves {
                e.write_curves = false;
            }
            e.validate().map_err(|err| CliError::Inconsistent(err.to_string()))?;
            run.experiment = Some(e);
        }
    }
    Ok(run)
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let run = resolve(cli)?;
    let path = run.write_effective()?;
    if run.verbose {
        eprintln!("effective configuration written to {}", path.display());
    }
    if let Some(s) = &run.simulate {
        commands::simulate(&run, s)
    } else if let Some(r) = &run.reconstruct {
        commands::reconstruct(&run, r)
    } else {
        commands::experiment(&run, &run.out)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
