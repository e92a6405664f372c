use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use confam_cli::{parse_config, run_pipeline, CliError};

/// Runs a confam pipeline described by a dotted-key config file.
#[derive(Parser, Debug)]
#[command(name = "confam", version)]
struct Args {
    /// Config file (`key = value` per line).
    config: PathBuf,

    /// Override a config key, e.g. `--set family.eps=1e-5`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Cap on worker threads (overrides `threads`).
    #[arg(long)]
    threads: Option<usize>,

    /// Validate the config and print it with defaults filled, without running.
    #[arg(long)]
    check: bool,
}

fn run(args: &Args) -> Result<(), CliError> {
    let mut overrides = args.set.clone();
    if let Some(n) = args.threads {
        overrides.push(format!("threads={n}"));
    }
    let cfg = parse_config(&args.config, &overrides)?;
    if args.check {
        print!("{}", cfg.to_text());
        return Ok(());
    }
    let summary = run_pipeline(&cfg)?;
    for p in &summary.artifacts {
        println!("{}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
