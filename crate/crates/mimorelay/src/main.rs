use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use mimorelay::harness::{config, emit, experiments};
use mimorelay::Error;

/// Simulator for a multi-pair two-way relay with hybrid analog/digital
/// zero-forcing under an RF-chain constraint.
#[derive(Parser, Debug)]
#[command(name = "mimorelay", version, disable_help_subcommand = true)]
struct Cli {
    /// Experiment to run, or `list` to enumerate the known experiments.
    experiment: String,

    /// Path to the experiment config file.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Override the config's RNG seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Override the config's Monte Carlo trial count.
    #[arg(long)]
    trials: Option<usize>,

    /// Write results here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Output format.
    #[arg(long, value_parser = ["csv", "json"])]
    format: Option<String>,

    /// Use full-resolution sweep grids instead of the reduced defaults.
    #[arg(long)]
    full: bool,
}

const EXIT_VALIDATION: u8 = 1;
const EXIT_RUNTIME: u8 = 2;

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::InvalidParameter(_)
        | Error::Config(_)
        | Error::UnknownExperiment(_)
        | Error::InvalidState(_) => EXIT_VALIDATION,
        Error::SingularChannel { .. }
        | Error::SimulationFailure(_)
        | Error::OptimizerFailure(_)
        | Error::Io { .. } => EXIT_RUNTIME,
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let path = cli.config.ok_or_else(|| {
        Error::Config("--config <file> is required to run an experiment".into())
    })?;
    let text = std::fs::read_to_string(&path).map_err(|source| Error::Io {
        path: path.clone(),
        source,
    })?;
    let mut cfg = config::parse_config_with_experiment(&text, Some(&cli.experiment))?;

    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = cli.trials {
        if trials == 0 {
            return Err(Error::Config("--trials must be >= 1".into()));
        }
        cfg.trials = trials;
    }
    if let Some(out) = cli.out {
        cfg.out = Some(out);
    }
    if let Some(format) = cli.format {
        cfg.format = format.parse()?;
    }
    cfg.full = cfg.full || cli.full;

    let table = experiments::run_experiment(&cfg)?;
    emit::emit(&table, cfg.format, cfg.out.as_deref(), cfg.seed, cfg.trials)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are not errors
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_VALIDATION,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    if cli.experiment == "list" {
        for name in experiments::list_experiments() {
            println!("{name}");
        }
        return ExitCode::SUCCESS;
    }

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
