use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use ccshock_cli::commands::{execute, Command, Status, COMMANDS};
use ccshock_cli::config::{parse_config, RunConfig};

/// Concave-convex shock stability experiments.
#[derive(Debug, Parser)]
#[command(name = "ccshock", version)]
struct Args {
    /// Configuration file (`key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed overriding `rng_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory overriding `output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// One of the commands listed below.
    #[arg(long)]
    command: String,
}

fn usage() -> String {
    let names: Vec<&str> = COMMANDS.iter().map(|(n, _)| *n).collect();
    format!("usage: ccshock --command <name> [--config <path>] [--seed <n>] [--out <dir>]\ncommands: {}", names.join(", "))
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            if code != 0 {
                eprintln!("{}", usage());
            }
            return ExitCode::from(code);
        }
    };
    let cmd: Command = match args.command.parse() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}\n{}", usage());
            return ExitCode::from(1);
        }
    };
    let text = match &args.config {
        Some(p) => match std::fs::read_to_string(p) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("{}: {e}", p.display());
                return ExitCode::from(1);
            }
        },
        None => String::new(),
    };
    let mut cfg: RunConfig = match parse_config(&text) {
        Ok(c) => c,
        Err(errs) => {
            eprintln!("{errs}");
            return ExitCode::from(1);
        }
    };
    if let Some(s) = args.seed {
        cfg.rng_seed = s;
    }
    let out = args.out.unwrap_or_else(|| cfg.output_dir.clone());
    match execute(&cfg, cmd, &out, &text) {
        Ok(Status::Ok) => {
            println!("{}: ok, artifacts in {}", cmd.name(), out.display());
            ExitCode::SUCCESS
        }
        Ok(Status::Failed(w)) => {
            eprintln!("{}: verification failed, witness in {}", cmd.name(), w.display());
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("{}: {e}", cmd.name());
            ExitCode::from(e.exit_code())
        }
    }
}
