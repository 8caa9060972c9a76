//! `cepdbs`: regenerates the emitter–microring data sets as CSV/JSON.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Failure, Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "cepdbs", version, about = "Dressed bound states of an emitter in a chiral microring")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration; defaults apply to anything omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    g: Option<f64>,
    #[arg(long, global = true)]
    kappa: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    phi: Option<f64>,
    /// Photon cutoff per mode for `blockade`.
    #[arg(long, global = true)]
    nmax: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Emission spectrum, optionally swept over one parameter.
    Spectrum,
    /// Populations after exciting the emitter.
    Dynamics,
    /// Vacancy and Friedrich–Wintgen bound states (JSON).
    DbsFind,
    /// Two-emitter concurrence.
    Entangle,
    /// Photon flux and g2(0) of the CW mode under a weak drive.
    Blockade,
}

fn load(common: &Common) -> Result<RunConfig, Failure> {
    let mut config = match &common.config {
        Some(path) => {
            let text =
                std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    config.apply(&Overrides { g: common.g, kappa: common.kappa, phi: common.phi, n_max: common.nmax });
    config.resolve()
}

fn run(cli: &Cli) -> Result<(), Failure> {
    if let Some(n) = cli.common.threads {
        if n == 0 {
            return Err(Failure::Config("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Failure::Io(e.to_string()))?;
    }
    let config = load(&cli.common)?;
    let text = match cli.command {
        Command::Spectrum => commands::spectrum(&config)?,
        Command::Dynamics => commands::dynamics(&config)?,
        Command::DbsFind => commands::dbs_find(&config)?,
        Command::Entangle => commands::entangle(&config)?,
        Command::Blockade => commands::blockade(&config)?,
    };
    match &cli.common.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cepdbs: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
