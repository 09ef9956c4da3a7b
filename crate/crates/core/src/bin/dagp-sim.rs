use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dagp_core::harness::{check_params_report, run_experiment, ExperimentConfig, ExperimentId};
use dagp_core::Error;

#[derive(Parser)]
#[command(name = "dagp-sim", version, about = "Run DAGP experiments and spectral parameter checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run { config: PathBuf },
    /// Run the mu and (rho, alpha) scans with the graph and parameters of a config.
    Scan { config: PathBuf },
    /// Check the root conditions at the config's parameters.
    CheckParams { config: PathBuf },
    /// Run the gradient-descent pencil check preset.
    GdCheck {
        /// Output directory.
        #[arg(long, default_value = "out/gd_check")]
        out: PathBuf,
    },
}

fn exit_for(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    match e.root() {
        Error::Config { .. } => ExitCode::from(2),
        _ => ExitCode::from(3),
    }
}

fn print_bundle(cfg: &ExperimentConfig) -> Result<(), Error> {
    let bundle = run_experiment(cfg)?;
    print!("{}", bundle.summary);
    println!("output: {}", bundle.dir.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config } => ExperimentConfig::load(&config).and_then(|c| print_bundle(&c)),
        Command::Scan { config } => ExperimentConfig::load(&config).and_then(|c| {
            print_bundle(&ExperimentConfig { experiment: ExperimentId::ParamScan, solvers: Vec::new(), ..c })
        }),
        Command::CheckParams { config } => ExperimentConfig::load(&config).and_then(|c| {
            let (certified, text) = check_params_report(&c)?;
            print!("{text}");
            println!("certified = {certified}");
            Ok(())
        }),
        Command::GdCheck { out } => {
            print_bundle(&ExperimentConfig { output_dir: out, ..ExperimentConfig::preset(ExperimentId::GdCheck) })
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => exit_for(&e),
    }
}
