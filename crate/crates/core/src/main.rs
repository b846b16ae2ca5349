use clap::{Args, Parser, Subcommand};
use gamow::config::{parse_config, Mode};
use gamow::run::run_subcommand;
use std::path::PathBuf;
use std::process::ExitCode;

/// Resonance-decay numerics and single-ion quantum-jump statistics.
#[derive(Parser)]
#[command(name = "gamow", version, disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the key = value run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Directory receiving the artifact files (default: current directory).
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a shelving trajectory: trace.csv + jumps.csv.
    Simulate(CommonArgs),
    /// Detect dark periods in a trace: dark.csv.
    Detect(CommonArgs),
    /// Build the counting-function survival curve: survival.csv.
    Survival(CommonArgs),
    /// Fit the lifetime from a survival curve: fit.txt.
    Fit(CommonArgs),
    /// Evolved pole pairings against the exponential law: pairing.csv.
    Gamow(CommonArgs),
    /// Classify a sampled wave function: hardy.txt.
    Hardy(CommonArgs),
    /// Full chain simulate -> detect -> survival -> fit -> compare: report.txt.
    Report(CommonArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not errors.
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };

    let (mode, args) = match &cli.command {
        Command::Simulate(a) => (Mode::Simulate, a),
        Command::Detect(a) => (Mode::Detect, a),
        Command::Survival(a) => (Mode::Survival, a),
        Command::Fit(a) => (Mode::Fit, a),
        Command::Gamow(a) => (Mode::Gamow, a),
        Command::Hardy(a) => (Mode::Hardy, a),
        Command::Report(a) => (Mode::Report, a),
    };

    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read config {}: {e}", args.config.display());
            return ExitCode::from(1);
        }
    };
    let cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };

    match run_subcommand(mode, &cfg, &args.out_dir) {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            for path in &outcome.artifacts {
                eprintln!("wrote {}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
