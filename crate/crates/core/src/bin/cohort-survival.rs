use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cohort_survival::cli::{run, CliError, Command, Overrides, EXIT_USAGE};

/// Survival and hazard-shape analysis of establishment birth cohorts.
///
/// Exit codes: 0 success, 2 usage, 3 input, 4 schema or parse, 5 fit failure,
/// 70 internal error.
#[derive(Parser)]
#[command(name = "cohort-survival", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Life-table and Peto-Turnbull survival tables per cohort.
    Estimate(Flags),
    /// Parametric fits, AIC ranking and hazard shapes per cohort and strategy.
    Fit(Flags),
    /// Cross-cohort survival series, support frequencies and shape parameters.
    Report(Flags),
}

#[derive(Args)]
struct Flags {
    /// BDS CSV or cohort JSON file; repeatable.
    #[arg(long, short)]
    input: Vec<PathBuf>,
    /// Birth years (`2011`, `1977-1980,2011`) or `all`.
    #[arg(long)]
    cohort: Option<String>,
    /// lt, pt or both.
    #[arg(long)]
    strategy: Option<String>,
    /// Comma-separated family tags (EXP,WEI,...) or `all`.
    #[arg(long)]
    families: Option<String>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    horizon_years: Option<f64>,
    /// Output directory.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Comma-separated subset of json, csv, svg.
    #[arg(long)]
    format: Option<String>,
    /// TOML file with the same keys as the flags; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Flags {
    fn overrides(self) -> Result<Overrides, CliError> {
        let file = match &self.config {
            Some(path) => Overrides::load(path)?,
            None => Overrides::default(),
        };
        let flags = Overrides {
            input: (!self.input.is_empty()).then_some(self.input),
            cohort: self.cohort,
            strategy: self.strategy,
            families: self.families,
            restarts: self.restarts,
            tol: self.tol,
            max_iter: self.max_iter,
            horizon_years: self.horizon_years,
            out: self.out,
            format: self.format,
        };
        Ok(flags.over(file))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, flags) = match cli.command {
        Sub::Estimate(f) => (Command::Estimate, f),
        Sub::Fit(f) => (Command::Fit, f),
        Sub::Report(f) => (Command::Report, f),
    };
    let outcome = flags.overrides().and_then(Overrides::resolve).and_then(|config| run(command, &config));
    match outcome {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(u8::try_from(e.code).unwrap_or(EXIT_USAGE as u8))
        }
    }
}
