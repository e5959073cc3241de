// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use grpda_cli::bench::{render_table, run_benchmark_in};
use grpda_cli::fit::RateModel;
use grpda_cli::{bench, check_trace_file, fit_trace_file, load_config, AppError};

/// Benchmark harness for golden-ratio primal-dual solvers
#[derive(Parser, Debug)]
#[command(name = "grpda-bench", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run benchmark configs and write traces and summaries
    Run {
        #[arg(required = true, value_name = "CONFIG")]
        configs: Vec<PathBuf>,
        /// Output directory; overrides the config and GRPDA_OUT_DIR
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Check solver invariants on a trace CSV
    Check {
        trace: PathBuf,
        /// Saddle point file: primal line, then dual line
        #[arg(long)]
        saddle: Option<PathBuf>,
        /// Job summary; defaults to <trace>.summary.json
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Exit nonzero when an invariant fails
        #[arg(long)]
        strict: bool,
    },
    /// Fit a convergence rate to a trace column
    Fit {
        trace: PathBuf,
        #[arg(long, default_value = "gap")]
        column: String,
        #[arg(long, default_value = "loglog")]
        model: RateModel,
        /// First iteration of the window
        #[arg(long)]
        from: Option<usize>,
        /// Last iteration of the window
        #[arg(long)]
        to: Option<usize>,
    },
}

fn execute(command: Command) -> Result<bool, AppError> {
    match command {
        Command::Run { configs, out_dir } => {
            let loaded: Vec<_> = configs.iter().map(|p| load_config(p)).collect::<Result<_, _>>()?;
            for cfg in &loaded {
                let dir = out_dir.clone().unwrap_or_else(|| bench::output_dir(cfg));
                let report = run_benchmark_in(cfg, &dir)?;
                println!("# {} -> {}", cfg.name, report.output_dir.display());
                print!("{}", render_table(&report.summaries));
            }
            Ok(true)
        }
        Command::Check { trace, saddle, summary, strict } => {
            let report = check_trace_file(&trace, saddle.as_deref(), summary.as_deref())?;
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            Ok(!strict || report.all_passed())
        }
        Command::Fit { trace, column, model, from, to } => {
            let window = match (from, to) {
                (None, None) => None,
                (a, b) => Some(a.unwrap_or(0)..=b.unwrap_or(usize::MAX)),
            };
            let fit = fit_trace_file(&trace, &column, model, window)?;
            println!("{}", serde_json::to_string(&fit).expect("fit serializes"));
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(1)
        }
    }
}
