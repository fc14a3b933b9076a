use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use recoflow_cli::commands::{coefficients, run, verify};
use recoflow_cli::{CliError, Format};

#[derive(Parser)]
#[command(name = "recoflow", version, about = "Recombination flows on finite product spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one or more scenario files.
    Run {
        /// Scenario JSON; repeat for a batch.
        #[arg(long, required = true)]
        config: Vec<PathBuf>,
        /// Output file, or output directory for a batch. Defaults to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Replaces the seed of a random initial measure.
        #[arg(long)]
        seed: Option<u64>,
        /// Scenarios run concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Run a seeded property suite and write a JSON report.
    Verify {
        /// algebra, semigroup, moebius, generalized or all.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Report path. Defaults to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate the single-crossover coefficients a_G(t) and b_G(t).
    Coefficients {
        /// One rate per link, comma separated.
        #[arg(long, required = true, value_delimiter = ',', allow_hyphen_values = true)]
        rates: Vec<f64>,
        #[arg(long)]
        t_end: f64,
        #[arg(long, default_value_t = 0.1)]
        stride: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

fn report(e: &CliError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            out,
            format,
            seed,
            jobs,
        } => {
            let failures = run(&config, out.as_deref(), format, seed, jobs);
            let mut code = 0;
            for (path, e) in &failures {
                if path.as_os_str().is_empty() {
                    eprintln!("error: {e}");
                } else {
                    eprintln!("error: {}: {e}", path.display());
                }
                code = code.max(e.exit_code());
            }
            ExitCode::from(code)
        }
        Command::Verify { suite, seed, out } => match verify(&suite, seed, out.as_deref()) {
            Ok(_) => ExitCode::SUCCESS,
            Err(e) => report(&e),
        },
        Command::Coefficients {
            rates,
            t_end,
            stride,
            out,
            format,
        } => match coefficients(&rates, t_end, stride, out.as_deref(), format) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => report(&e),
        },
    }
}
