use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use shorttime::cli::{error_record, run_command, Command, ExperimentConfig};
use shorttime::Error;

/// Short-time transition densities of dX = f(X) dt + dB.
#[derive(Parser)]
#[command(version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config and SHORTTIME_OUT_DIR).
    #[arg(long)]
    out_dir: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Kernel kind(s) for `density`: a name or `all`.
    #[arg(long)]
    kind: Option<String>,
    /// Dotted-path override, e.g. `--set density.horizon=0.2`. Repeatable.
    #[arg(long = "set", value_name = "PATH=VALUE")]
    sets: Vec<String>,
}

fn load(args: &Args) -> Result<ExperimentConfig, Error> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", args.config.display())))?;
    let mut sets = args.sets.clone();
    if let Some(dir) = &args.out_dir {
        sets.push(format!("out_dir={}", serde_json::Value::String(dir.clone())));
    }
    if let Some(seed) = args.seed {
        sets.push(format!("seed={seed}"));
    }
    if let Some(kind) = &args.kind {
        sets.push(format!("density.kinds={}", serde_json::Value::String(kind.clone())));
    }
    ExperimentConfig::from_json(&text)?.with_overrides(&sets)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match load(&args).and_then(|cfg| run_command(args.command, &cfg)) {
        Ok(manifest) => {
            let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
            let _ = writeln!(std::io::stdout(), "{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", error_record(&e));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
