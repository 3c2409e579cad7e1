//! Command-line front end for the experiment runner.
//!
//! Exit codes: 0 on success with all run assertions passing, 2 when an
//! assertion fails, 1 for usage or configuration errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use semibeam::config::parse_config;
use semibeam::runner::{run_command, CommandKind};

#[derive(Parser)]
#[command(
    name = "semibeam",
    version,
    about = "Spectral Galerkin experiments for coupled double-beam / heat systems with fractional damping"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration file (TOML)
    #[arg(long)]
    config: PathBuf,
    /// Override the configured mode count
    #[arg(long)]
    modes: Option<usize>,
    /// Override the configured probe seed
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for sweeps (0 = default pool)
    #[arg(long)]
    workers: Option<usize>,
    /// Output path prefix (overrides config and SEMIBEAM_OUT_DIR)
    #[arg(long)]
    out: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Verify the dissipation identity on random states
    Check(RunArgs),
    /// Propagate the smooth reference datum and record energy/dissipation
    Simulate(RunArgs),
    /// Eigenvalues of the truncated generator and the stability margin
    Spectrum(RunArgs),
    /// Resolvent norm sweep along the imaginary axis
    Resolvent(RunArgs),
    /// Resolvent scaling-exponent fit against the damping-derived target
    Gevrey(RunArgs),
    /// Ratio audit of the resolvent inequalities
    Audit(RunArgs),
    /// Stability sweep over a region of damping exponents
    Sweep(RunArgs),
}

impl Command {
    fn split(self) -> (CommandKind, RunArgs) {
        match self {
            Command::Check(a) => (CommandKind::Check, a),
            Command::Simulate(a) => (CommandKind::Simulate, a),
            Command::Spectrum(a) => (CommandKind::Spectrum, a),
            Command::Resolvent(a) => (CommandKind::Resolvent, a),
            Command::Gevrey(a) => (CommandKind::Gevrey, a),
            Command::Audit(a) => (CommandKind::Audit, a),
            Command::Sweep(a) => (CommandKind::Sweep, a),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help / --version are not usage errors
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (kind, args) = cli.command.split();
    let mut cfg = match parse_config(&args.config) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("semibeam: {e}");
            return ExitCode::from(1);
        }
    };
    if let Some(m) = args.modes {
        cfg.modes = m;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(w) = args.workers {
        cfg.workers = w;
    }
    match run_command(&cfg, kind, args.out.as_deref()) {
        Ok(outcome) => {
            for line in &outcome.summary {
                println!("{line}");
            }
            for a in &outcome.assertions {
                println!("[{}] {}: {}", if a.pass { "PASS" } else { "FAIL" }, a.name, a.detail);
            }
            println!(
                "wrote {} output file(s); manifest {}",
                outcome.outputs.len(),
                outcome.manifest.display()
            );
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("semibeam: {e}");
            ExitCode::from(1)
        }
    }
}
