use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use delaystab::cli::{self, Command, Options};
use delaystab::NormMode;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Declared,
    Sampled,
}

/// Stability certificates and simulation for coupled second-order delay systems.
#[derive(Debug, Parser)]
#[command(name = "delaystab", version)]
struct Args {
    /// validate | certify | certify-corollary | simulate | decay | apriori | reproduce-example
    command: Command,
    /// JSON run configuration (optional for reproduce-example)
    config: Option<PathBuf>,
    #[arg(long)]
    step: Option<f64>,
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Use 3/2 instead of 1 in the first-order delay test
    #[arg(long)]
    three_halves: bool,
    /// Output path (report, or trajectory CSV for `simulate`)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let opts = Options {
        step: args.step,
        t_end: args.t_end,
        mode: args.mode.map(|m| match m {
            Mode::Declared => NormMode::Declared,
            Mode::Sampled => NormMode::Sampled,
        }),
        three_halves: args.three_halves,
        out: args.out,
    };
    let outcome = cli::run(args.command, args.config.as_deref(), &opts);
    if let Some(text) = &outcome.text {
        print!("{text}");
    } else {
        println!("{}", serde_json::to_string_pretty(&outcome.report).expect("json"));
    }
    if let Some(err) = outcome.report.get("error") {
        eprintln!("error [{}]: {}", err["module"].as_str().unwrap_or("?"), err["message"].as_str().unwrap_or("?"));
    }
    ExitCode::from(outcome.exit_code as u8)
}
