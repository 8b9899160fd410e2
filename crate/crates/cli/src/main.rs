//! `adscore`: fit checklist models, score deployments, and derive
//! reliability budgets and effectiveness indexes from the results.
//!
//! Exit codes: 0 success, 1 usage, 2 data error, 3 numerical error.

mod commands;
mod output;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use adscore_core::ErrorClass;

#[derive(Parser)]
#[command(
    name = "adscore",
    version,
    about = "Deployment checklist scoring and reliability budgets",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a 1PL/2PL model to a response CSV and save it as JSON.
    Fit(commands::FitArgs),
    /// Score deployments against a fitted model (compact table).
    Score(commands::ScoreArgs),
    /// Full per-item score report with gaps and improvement ranking.
    Report(commands::ReportArgs),
    /// Score a deployment history and classify the trend per application.
    Trend(commands::TrendArgs),
    /// Tabulate characteristic curves, information, and expected scores.
    Curves(commands::CurvesArgs),
    /// Exact error budget for a single SLO value.
    Budget(commands::BudgetArgs),
    /// Soft error budgets over a service mesh, with the minimum rule.
    SoftBudget(commands::SoftBudgetArgs),
    /// Deployment index per application from version outcomes.
    DeployIndex(commands::DeployIndexArgs),
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let kind = err.kind();
            let _ = err.print();
            return if matches!(kind, ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                0
            } else {
                1
            };
        }
    };

    let result = match cli.command {
        Command::Fit(args) => commands::fit(args),
        Command::Score(args) => commands::score(args),
        Command::Report(args) => commands::report(args),
        Command::Trend(args) => commands::trend(args),
        Command::Curves(args) => commands::curves(args),
        Command::Budget(args) => commands::budget(args),
        Command::SoftBudget(args) => commands::soft_budget(args),
        Command::DeployIndex(args) => commands::deploy_index(args),
    };

    match result {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            match err.class() {
                ErrorClass::Data => 2,
                ErrorClass::Numerical => 3,
            }
        }
    }
}
