use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use thermistor_cli::commands::{self, Overrides};
use thermistor_cli::{identities, CliResult, Config, Status, EXIT_CONFIG};

/// Solve the nonlocal conformable thermistor problem and check the
/// numerical identities behind it.
///
/// Exit codes: 0 success, 2 not converged (or identity orders too low),
/// 3 tube rejected, 4 configuration or model error.
#[derive(Parser)]
#[command(name = "thermistor", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verify the tube, run the Picard iteration, write solution.csv and report.txt
    Solve(RunArgs),
    /// Check the tube conditions without solving
    VerifyTube(RunArgs),
    /// Print the convergence table for the conformable identities
    Identities(IdentityArgs),
    /// Solve every (lambda, alpha) tuple from [sweep], write sweep.csv
    Sweep(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Configuration file
    #[arg(long)]
    config: PathBuf,
    /// Output directory (verify-tube writes tube_report.csv only when given)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override [solver] grid_n
    #[arg(long)]
    grid_n: Option<usize>,
    /// Override [problem] alpha (and the sweep alpha list)
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Args)]
struct IdentityArgs {
    /// Comma separated orders in (0, 1]
    #[arg(long, value_delimiter = ',', default_values_t = identities::DEFAULT_ALPHAS)]
    alpha: Vec<f64>,
    /// Comma separated grid sizes, coarse to fine
    #[arg(long, value_delimiter = ',', default_values_t = identities::DEFAULT_SIZES)]
    grid_n: Vec<usize>,
    /// Also write identities.csv here
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load(args: &RunArgs) -> CliResult<Config> {
    let mut config = Config::from_path(&args.config)?;
    Overrides {
        grid_n: args.grid_n,
        alpha: args.alpha,
    }
    .apply(&mut config)?;
    Ok(config)
}

fn out_dir(args: &RunArgs) -> &Path {
    args.out.as_deref().unwrap_or(Path::new("."))
}

fn run(command: Command, stdout: &mut String) -> CliResult<Status> {
    match command {
        Command::Solve(args) => commands::run_solve(&load(&args)?, out_dir(&args), stdout),
        Command::VerifyTube(args) => {
            commands::run_verify(&load(&args)?, args.out.as_deref(), stdout)
        }
        Command::Sweep(args) => {
            let threads = commands::threads_from_env()?;
            commands::run_sweep(&load(&args)?, out_dir(&args), threads, stdout)
        }
        Command::Identities(args) => {
            let rows = identities::identity_table(&args.alpha, &args.grid_n)?;
            let csv = identities::to_csv(&rows);
            if let Some(dir) = &args.out {
                commands::write_file(dir, "identities.csv", &csv)?;
            }
            stdout.push_str(&csv);
            Ok(if identities::passes(&rows) {
                Status::Ok
            } else {
                Status::NotConverged
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { 0 });
        }
    };
    let mut stdout = String::new();
    let result = run(cli.command, &mut stdout);
    print!("{stdout}");
    match result {
        Ok(status) => ExitCode::from(status.code()),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}
