//! Run a checked-in experiment config through the library entry point and
//! print its manifest.
//!
//! cargo run --example run_experiment -- density configs/density_all.json /tmp/out

use clap::ValueEnum;
use shorttime::cli::{run_command_in, Command, ExperimentConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let cmd = args.next().unwrap_or_else(|| "validate".into());
    let cmd = Command::from_str(&cmd, true)?;
    let path = args.next().unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/configs/validate.json").into());
    let out = args.next().unwrap_or_else(|| std::env::temp_dir().join("shorttime-example").display().to_string());

    let cfg = ExperimentConfig::from_json(&std::fs::read_to_string(&path)?)?;
    let manifest = run_command_in(cmd, &cfg, &out)?;
    println!("{}", serde_json::to_string_pretty(&manifest)?);
    Ok(())
}
