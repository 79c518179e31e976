use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qhgeo_cli::{parse_config, replay_check, run, RunOptions};

#[derive(Parser)]
#[command(name = "qhgeo", version, about = "Quasihyperbolic geometry experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a config without running anything.
    Validate { config: PathBuf },
    /// Run every experiment of a config and write reports.
    Run {
        config: PathBuf,
        /// Output directory (overrides `output_dir` in the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads.
        #[arg(long)]
        jobs: Option<usize>,
        /// Write SVG plots next to the reports.
        #[arg(long)]
        plots: bool,
    },
    /// Re-derive summaries and verdicts of a stored report.
    ReplayCheck { report: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Validate { config } => match parse_config(&config) {
            Ok(cfg) => {
                println!("ok: {cfg}");
                0
            }
            Err(e) => {
                eprintln!("{e}");
                2
            }
        },
        Command::Run {
            config,
            out,
            jobs,
            plots,
        } => {
            let opts = RunOptions { out, jobs, plots };
            match parse_config(&config).and_then(|cfg| run(&cfg, &opts)) {
                Ok(summary) => {
                    for line in summary.lines() {
                        println!("{line}");
                    }
                    summary.exit_code()
                }
                Err(e) => {
                    eprintln!("{e}");
                    2
                }
            }
        }
        Command::ReplayCheck { report } => match replay_check(&report) {
            Ok(d) if d.is_empty() => {
                println!("replay ok: {}", report.display());
                0
            }
            Ok(d) => {
                for line in d {
                    println!("{line}");
                }
                1
            }
            Err(e) => {
                eprintln!("{e}");
                2
            }
        },
    };
    ExitCode::from(code as u8)
}
