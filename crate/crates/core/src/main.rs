use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use causelike::scenario::{parse_scenario, run_scenario, OrderChoice, RunError, RunOptions, Sweep};

#[derive(Parser)]
#[command(
    name = "causelike",
    version,
    about = "Order-dependent conditional and counterfactual probabilities for two-party measurements"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a scenario file.
    Run {
        /// Scenario TOML file.
        path: PathBuf,
        /// Override the jump order: l-first, r-first or both.
        #[arg(long)]
        order: Option<String>,
        /// Hardy parameter grid, e.g. alpha=0.1:1.4:10 (repeatable).
        #[arg(long)]
        sweep: Vec<String>,
        /// Override the Monte Carlo seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the Monte Carlo run count.
        #[arg(long)]
        runs: Option<u64>,
        /// Also write all rows as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Suppress the table on stdout.
        #[arg(long)]
        quiet: bool,
    },
}

fn fail(err: &RunError) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(err.exit_code() as u8)
}

fn run(
    path: &Path,
    order: Option<String>,
    sweep: Vec<String>,
    seed: Option<u64>,
    runs: Option<u64>,
) -> Result<causelike::scenario::Report, RunError> {
    let text = std::fs::read_to_string(path).map_err(|e| RunError::Invalid(format!("{}: {e}", path.display())))?;
    let stem = path
        .file_stem()
        .map_or("scenario".into(), |s| s.to_string_lossy().into_owned());
    let file = parse_scenario(&text, &stem)
        .map_err(|e| RunError::Invalid(format!("{}:{}:{}: {}", path.display(), e.line, e.column, e.message)))?;
    let order = order
        .map(|o| {
            OrderChoice::parse(&o)
                .ok_or_else(|| RunError::Invalid(format!("--order {o:?}: expected l-first, r-first or both")))
        })
        .transpose()?;
    let sweeps = sweep
        .iter()
        .map(|s| Sweep::parse(s).map_err(RunError::Invalid))
        .collect::<Result<Vec<_>, _>>()?;
    if runs == Some(0) {
        return Err(RunError::Invalid("--runs must be at least 1".into()));
    }
    let opts = RunOptions {
        order,
        sweeps,
        seed,
        runs,
    };
    run_scenario(&file, &opts)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Command::Run {
        path,
        order,
        sweep,
        seed,
        runs,
        csv,
        quiet,
    } = cli.command;

    let report = match run(&path, order, sweep, seed, runs) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    if !quiet {
        print!("{}", report.render_table());
    }
    if let Some(out) = csv {
        if let Err(e) = std::fs::write(&out, report.to_csv()) {
            eprintln!("error: {}: {e}", out.display());
            return ExitCode::from(1);
        }
    }
    ExitCode::SUCCESS
}
