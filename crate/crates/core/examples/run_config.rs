//! Runs an experiment configuration and prints the JSON report.
//!
//! cargo run --example run_config -- configs/nr_quartic.json

use std::path::PathBuf;

use accretive_flows::cli::{render, Format};
use accretive_flows::harness::{run_experiment, ExperimentConfig};

fn main() -> accretive_flows::Result<()> {
    let path = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/nr_scaled_identity.json")));
    let cfg = ExperimentConfig::load(&path)?;
    let report = run_experiment(&cfg)?;
    eprint!("{}", report.summary());
    print!("{}", render(&report, Format::Json)?);
    Ok(())
}
