// Copyright 2026 span2records Contributors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use span2records_core::synth::Pattern;
use tracing_subscriber::EnvFilter;

mod commands;
mod error;

use error::CliError;

const LOG_ENV: &str = "SPAN2RECORDS_LOG";

/// Convert OpenTelemetry traces into Kieker monitoring logs and analyze them.
#[derive(Debug, Parser)]
#[command(name = "span2records", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Convert an OTLP file (.json or .binpb) into a monitoring log.
    Convert {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Receive OTLP/HTTP exports and convert each completed trace.
    Receive {
        #[arg(long)]
        listen: String,
        #[arg(long)]
        output: PathBuf,
        /// Seconds of inactivity after which a trace counts as complete.
        #[arg(long, default_value_t = 10.0)]
        completion_timeout: f64,
    },
    /// Rebuild traces from a monitoring log and write DOT graphs.
    Analyze {
        #[arg(long)]
        input: PathBuf,
        /// Infer callers from timestamps instead of a single call stack.
        #[arg(long = "asynchronousTrace")]
        asynchronous_trace: bool,
        #[arg(long)]
        calltree: Option<PathBuf>,
        #[arg(long)]
        deps: Option<PathBuf>,
    },
    /// Write synthetic spans as an OTLP JSON file.
    Generate {
        #[arg(long)]
        pattern: Pattern,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        size: usize,
        /// Random pattern only: probability of overlapping calls.
        #[arg(long, default_value_t = 0.3)]
        overlap: f64,
        /// Number of traces, seeded consecutively from --seed.
        #[arg(long, default_value_t = 1)]
        traces: u64,
        #[arg(long)]
        output: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Convert { input, output } => commands::convert(&input, &output),
        Command::Receive {
            listen,
            output,
            completion_timeout,
        } => commands::receive(&listen, &output, completion_timeout),
        Command::Analyze {
            input,
            asynchronous_trace,
            calltree,
            deps,
        } => commands::analyze(
            &input,
            asynchronous_trace,
            calltree.as_deref(),
            deps.as_deref(),
        ),
        Command::Generate {
            pattern,
            seed,
            size,
            overlap,
            traces,
            output,
        } => commands::generate(pattern, seed, size, overlap, traces, &output),
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_env_filter(
            EnvFilter::try_from_env(LOG_ENV).unwrap_or_else(|_| EnvFilter::new("warn")),
        )
        .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() {
                ExitCode::from(CliError::USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
