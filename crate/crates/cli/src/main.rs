use std::fs;
use std::net::TcpListener;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use incbidi::bench::{run_benchmark, BenchConfig, Timer};
use incbidi_cli::commands::{check, trace, StepMode};
use incbidi_cli::server::serve;

#[derive(Parser)]
#[command(name = "incbidi", version, about = "Incremental bidirectional type checker for a gradual lambda calculus with holes")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum TimerArg {
    Cycles,
    MonotonicNs,
}

#[derive(Subcommand)]
enum Cmd {
    /// Mark a program and print it with its error count. Exits 1 if it has errors.
    Check { file: PathBuf },
    /// Replay an edit trace and print the final decorated program.
    Trace {
        file: PathBuf,
        /// Starting program (default `?`).
        #[arg(long)]
        program: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "manual")]
        step_mode: StepMode,
    },
    /// Time incremental against from-scratch checking on a mergesort tower.
    Bench {
        #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
        layers: u64,
        #[arg(long, default_value_t = 200)]
        edits: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, value_enum, default_value = "cycles")]
        timer: TimerArg,
        /// Write the CSV here instead of standard output.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Serve editing sessions over TCP on localhost.
    Serve {
        #[arg(long, default_value_t = 7878)]
        port: u16,
    },
}

fn read(p: &PathBuf) -> Result<String, ExitCode> {
    fs::read_to_string(p).map_err(|e| {
        eprintln!("{}: {e}", p.display());
        ExitCode::from(2)
    })
}

fn run(cli: Cli) -> Result<ExitCode, ExitCode> {
    match cli.cmd {
        Cmd::Check { file } => {
            let src = read(&file)?;
            let (out, errors) = check(&src).map_err(|e| {
                eprintln!("{}: {e}", file.display());
                ExitCode::from(2)
            })?;
            print!("{out}");
            Ok(if errors == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Cmd::Trace { file, program, step_mode } => {
            let src = read(&file)?;
            let prog = program.as_ref().map(read).transpose()?;
            match trace(prog.as_deref(), &src, step_mode) {
                Ok(out) => {
                    print!("{out}");
                    Ok(ExitCode::SUCCESS)
                }
                Err(f) => {
                    eprintln!("{}:{}: {}", file.display(), f.line, f.msg);
                    Err(ExitCode::FAILURE)
                }
            }
        }
        Cmd::Bench { layers, edits, seed, timer, output } => {
            let timer = match timer {
                TimerArg::Cycles => Timer::Cycles,
                TimerArg::MonotonicNs => Timer::MonotonicNs,
            };
            let cfg = BenchConfig { layers: layers as usize, edits, seed, timer };
            let report = run_benchmark(&cfg).map_err(|e| {
                eprintln!("bench: {e}");
                ExitCode::FAILURE
            })?;
            let csv = report.to_csv();
            match output {
                Some(p) => fs::write(&p, csv).map_err(|e| {
                    eprintln!("{}: {e}", p.display());
                    ExitCode::from(2)
                })?,
                None => print!("{csv}"),
            }
            eprintln!(
                "{} rows, total speedup {:.2}x, median inc {} / scratch {} {}, {:.1}% below diagonal",
                report.rows.len(),
                report.total_speedup(),
                report.median_inc(),
                report.median_scratch(),
                report.timer.name(),
                report.below_diagonal() * 100.0
            );
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Serve { port } => {
            let listener = TcpListener::bind(("127.0.0.1", port)).map_err(|e| {
                eprintln!("bind: {e}");
                ExitCode::from(2)
            })?;
            println!("listening on {}", listener.local_addr().map_err(|_| ExitCode::from(2))?);
            serve(listener).map_err(|e| {
                eprintln!("serve: {e}");
                ExitCode::FAILURE
            })?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    run(Cli::parse()).unwrap_or_else(|c| c)
}
