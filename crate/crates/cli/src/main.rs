//! Command-line driver: loads a sectioned key-value config, runs one study
//! command, and emits plot-ready CSV/JSON files with provenance headers.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{CliError, Config};

#[derive(Parser)]
#[command(name = "speclift", version, about = "Bayesian frequency estimation with engineered multi-level spectra", long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Path to the run configuration file.
    #[arg(long, global = true, default_value = "speclift.toml")]
    config: PathBuf,

    /// Output directory for emitted files.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Override the seed of any stochastic restart schedule.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Size of the worker thread pool (defaults to the core count).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Error bounds versus time for a fixed probe.
    Bounds,
    /// Single-qubit optimum: optimal time, error, and solver cross-checks.
    QubitOpt,
    /// Optimal error of equally gapped n-level probes over a time grid.
    NlevelSweep,
    /// Stroboscopic on-the-fly spectral engineering trace.
    Onthefly,
    /// Sequential measure-and-reprepare plan and its optimal step constant.
    Sequential,
    /// Two-spin degeneracy-lifting study.
    TwoQubit,
    /// Compile a protocol to ion-trap pulses.
    Compile,
    /// Re-simulate a compiled pulse schedule against the effective model.
    VerifyPulses,
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("speclift: cannot configure {threads} threads: {e}");
            return ExitCode::from(2);
        }
    }

    let config = match Config::load(&cli.config, cli.seed) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("speclift: config error: {e}");
            return ExitCode::from(2);
        }
    };

    let result = match cli.command {
        Command::Bounds => output::cmd_bounds(&config, &cli.out),
        Command::QubitOpt => output::cmd_qubit_opt(&config, &cli.out),
        Command::NlevelSweep => output::cmd_nlevel_sweep(&config, &cli.out),
        Command::Onthefly => output::cmd_onthefly(&config, &cli.out),
        Command::Sequential => output::cmd_sequential(&config, &cli.out),
        Command::TwoQubit => output::cmd_two_qubit(&config, &cli.out),
        Command::Compile => output::cmd_compile(&config, &cli.out),
        Command::VerifyPulses => output::cmd_verify_pulses(&config, &cli.out),
    };

    match result {
        Ok(files) => {
            use std::io::Write;
            let mut stdout = std::io::stdout();
            for f in files {
                // tolerate a closed pipe on the status output
                let _ = writeln!(stdout, "wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(CliError::Config(e)) => {
            eprintln!("speclift: config error: {e}");
            ExitCode::from(2)
        }
        Err(CliError::Numerical(e)) => {
            eprintln!("speclift: numerical failure: {e}");
            ExitCode::from(3)
        }
        Err(CliError::Io(e)) => {
            eprintln!("speclift: io error: {e}");
            ExitCode::from(3)
        }
    }
}
