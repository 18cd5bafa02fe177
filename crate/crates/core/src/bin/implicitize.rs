use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use implicitize::harness::{render_table, run_path, RunError, RunOptions};

#[derive(Parser)]
#[command(name = "implicitize", version, about = "Implicit Euler through accelerated explicit updates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file and write its CSV.
    Run {
        config: PathBuf,
        /// CSV destination; overrides the config's `output` key.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Leave the wall-time column empty so reruns are byte-identical.
        #[arg(long)]
        no_timing: bool,
        /// Worker threads for the parameter sweep.
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { 1 } else { 0 });
        }
    };
    match cli.command {
        Command::Run {
            config,
            output,
            no_timing,
            threads,
        } => {
            let options = RunOptions {
                output,
                timing: !no_timing,
                threads,
            };
            match run_path(&config, &options) {
                Ok(summary) => {
                    print!("{}", render_table(&summary.rows));
                    for note in &summary.notes {
                        println!("{note}");
                    }
                    println!("wrote {}", summary.output.display());
                    ExitCode::SUCCESS
                }
                Err(e @ RunError::Config(_)) => {
                    eprintln!("error: {}: {e}", config.display());
                    ExitCode::from(1)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
    }
}
