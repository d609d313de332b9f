use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use spinphoton_cli::config::OutputFormat;
use spinphoton_cli::{run_file, validate_file, Mode, Overrides, OUTPUT_DIR_ENV};

/// Simulate and fit spin-photon spectra from JSON scenario configs.
#[derive(Parser)]
#[command(name = "spinphoton", version)]
struct Cli {
    /// Suppress progress messages and warnings on stderr.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation scenario.
    Simulate(RunArgs),
    /// Run a fit scenario.
    Fit(RunArgs),
    /// Check a config and print every schema violation as JSON.
    Validate { config: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct RunArgs {
    config: PathBuf,
    /// Output file; overrides the config's output path.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Noise seed; overrides `noise.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for relative output paths.
    #[arg(long, env = OUTPUT_DIR_ENV)]
    output_dir: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mode, args) = match cli.command {
        Command::Validate { config } => {
            return match validate_file(&config) {
                Ok(diags) => {
                    let body = serde_json::json!({ "config": config, "valid": diags.is_empty(), "diagnostics": diags });
                    println!("{}", serde_json::to_string_pretty(&body).expect("diagnostics serialize"));
                    ExitCode::from(if diags.is_empty() { 0 } else { 2 })
                }
                Err(e) => {
                    eprintln!("{}", e.to_json());
                    ExitCode::from(e.exit_code())
                }
            };
        }
        Command::Simulate(a) => (Mode::Simulate, a),
        Command::Fit(a) => (Mode::Fit, a),
    };
    let overrides = Overrides {
        output: args.output,
        format: args.format.map(|f| match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }),
        seed: args.seed,
        output_dir: args.output_dir,
    };
    match run_file(mode, &args.config, &overrides) {
        Ok(done) => {
            if !cli.quiet {
                for w in &done.warnings {
                    eprintln!("warning: {w}");
                }
                eprintln!("wrote {} ({})", done.output.display(), done.manifest.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code())
        }
    }
}
