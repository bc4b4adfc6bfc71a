use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use ringbump_cli::config::{build_config, read_config_file, Command, ConfigError};
use ringbump_cli::{run, RunError};

/// Numerics for ring configurations of concentrating bubbles.
#[derive(Parser, Debug)]
#[command(name = "ringbump", version, about)]
struct Args {
    /// verify-g, gammas, balance, spectrum, reduce, nondegen or error-norm.
    command: Option<String>,
    /// `key = value` file, or a `manifest.json` from an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    m: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    tol: Option<String>,
    /// Comma-separated list of k values.
    #[arg(long)]
    sweep: Option<String>,
    /// Any config key, as KEY=VALUE. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

type Pairs = Vec<(String, String)>;

fn collect_pairs(args: &Args) -> Result<(Pairs, Option<Command>), ConfigError> {
    let mut pairs = match &args.config {
        Some(path) => read_config_file(path)?,
        None => Vec::new(),
    };
    let flags = [
        ("k", &args.k),
        ("n", &args.n),
        ("m", &args.m),
        ("out", &args.out),
        ("seed", &args.seed),
        ("grid", &args.grid),
        ("tol", &args.tol),
        ("sweep", &args.sweep),
    ];
    pairs.extend(
        flags
            .into_iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone()))),
    );
    for item in &args.set {
        let (k, v) = item.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: 0,
            text: item.clone(),
        })?;
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    let command = match &args.command {
        Some(name) => Some(name.parse().map_err(|_| ConfigError::Type {
            key: "command".into(),
            value: name.clone(),
            expected: "one of verify-g, gammas, balance, spectrum, reduce, nondegen, error-norm",
        })?),
        None => None,
    };
    Ok((pairs, command))
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = collect_pairs(&args)
        .and_then(|(pairs, command)| build_config(&pairs, command))
        .map_err(RunError::from)
        .and_then(|cfg| run(&cfg));
    match result {
        Ok(outcome) => {
            for line in &outcome.lines {
                println!("{line}");
            }
            for c in &outcome.checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if outcome.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
