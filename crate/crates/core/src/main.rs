use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use surface_nls::config::{ConfigSource, Experiment};
use surface_nls::experiments::execute;
use surface_nls::selftest::selftest;
use surface_nls::Error;

#[derive(Parser)]
#[command(name = "surface-nls", version, about = "Cubic NLS experiments on the torus and the sphere")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve random smooth data and record mass and energies.
    Evolve { config: PathBuf },
    /// Modified-energy increments over one local interval for a sweep of N.
    AlmostConservation { config: PathBuf },
    /// Bilinear Strichartz ratios on semiclassical windows.
    Strichartz { config: PathBuf },
    /// Spectral localization of eigenfunction products.
    Locality { config: PathBuf },
    /// The A_0 / A_n iteration identity on resonant torus quadruples.
    AnIdentity { config: PathBuf },
    /// Fourier tensorization of the resonant multiplier.
    Tensorize { config: PathBuf },
    /// Fast built-in consistency checks.
    Selftest,
}

fn exit_for(err: &Error) -> u8 {
    if err.is_numerical_refusal() {
        3
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, path) = match cli.command {
        Command::Evolve { config } => (Experiment::Evolve, config),
        Command::AlmostConservation { config } => (Experiment::AlmostConservation, config),
        Command::Strichartz { config } => (Experiment::Strichartz, config),
        Command::Locality { config } => (Experiment::Locality, config),
        Command::AnIdentity { config } => (Experiment::AnIdentity, config),
        Command::Tensorize { config } => (Experiment::Tensorize, config),
        Command::Selftest => {
            let checks = selftest();
            for c in &checks {
                println!("{}", c.line());
            }
            return if checks.iter().all(|c| c.passed) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };
    let result = ConfigSource::load(&path).and_then(|src| execute(experiment, &src));
    match result {
        Ok(report) => {
            print!("{}", report.output.summary(experiment.name()));
            println!("artifacts: {}", report.dir.display());
            if report.output.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(err) => {
            eprintln!("error: {err}");
            if let Error::InsufficientExactness { required, .. }
            | Error::GridBudgetExceeded { required, .. }
            | Error::InsufficientTimeResolution { required, .. } = err
            {
                eprintln!("required budget: {required}");
            }
            ExitCode::from(exit_for(&err))
        }
    }
}
