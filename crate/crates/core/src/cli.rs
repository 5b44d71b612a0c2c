//! Command-line front end.
//!
//! Exit codes: 0 when every certificate passes, 1 when at least one fails,
//! 2 for configuration, resource or I/O errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::harness::{registry, run_scenario, ExperimentConfig, Report, Scenario};

/// Fixed CSV header, one row per `(k, counterfunction)` cell.
pub const CSV_HEADER: [&str; 6] = [
    "k",
    "counterfunction",
    "certified_bound",
    "worst_observed",
    "slack",
    "status",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Parser, Debug)]
#[command(name = "accretive-flows", version, about = "Certified convergence rates for accretive flows")]
struct Cli {
    /// Print a per-row summary and the runtime to stderr.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a full modulus on sampled graph points.
    VerifyModulus(RunArgs),
    /// Certify the Cauchy rate of an orbit.
    CertifyNr(RunArgs),
    /// Certify the Cauchy rate of an orbit started in the closure of the domain.
    CertifyNrClosure(RunArgs),
    /// Certify the metastability bound of an almost-orbit.
    CertifyXuMeta(RunArgs),
    /// Certify the rate of convergence of an almost-orbit.
    CertifyXuRoc(RunArgs),
    /// Check the liminf lemmas on sampled windows.
    LiminfCheck(RunArgs),
    /// Print the registered operators and moduli.
    ListInstances,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Report destination; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Overrides the seed in the configuration.
    #[arg(long, env = "ACCRETIVE_FLOWS_SEED")]
    seed: Option<u64>,
}

/// Serializes a report. JSON output is deterministic for equal reports.
pub fn render(report: &Report, format: Format) -> Result<String> {
    match format {
        Format::Json => serde_json::to_string_pretty(report)
            .map(|s| s + "\n")
            .map_err(|e| Error::Io(e.to_string())),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| Error::Io(e.to_string());
            w.write_record(CSV_HEADER).map_err(io)?;
            // Debug formatting is the shortest round-trip form, with exponents for tiny values.
            for row in &report.rows {
                w.write_record([
                    row.k.to_string(),
                    row.counterfunction.clone().unwrap_or_default(),
                    row.certified_bound.to_string(),
                    format!("{:?}", row.worst_observed),
                    format!("{:?}", row.slack),
                    row.status.as_str().to_string(),
                ])
                .map_err(io)?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
        }
    }
}

/// Writes a report to `path`, or to stdout when `path` is `None`.
pub fn emit_report(report: &Report, format: Format, path: Option<&Path>) -> Result<()> {
    let text = render(report, format)?;
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io(format!("cannot write {}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::Io(e.to_string())),
    }
}

fn list_instances() -> Result<String> {
    let mut out = format!("{:<24} {:<34} {}\n", "instance", "operator", "full modulus");
    for inst in registry()? {
        out.push_str(&format!(
            "{:<24} {:<34} {}\n    {}\n",
            inst.name,
            inst.operator.name(),
            inst.full.label(),
            inst.description
        ));
    }
    out.push_str(
        "\nconfig operators: scaled-identity, spd-linear, dirichlet-laplacian, quartic, anti-monotone\n\
         config moduli: strongly-accretive, laplacian, quartic, theta, rate\n",
    );
    Ok(out)
}

fn run(args: &RunArgs, scenario: Scenario, verbose: u8) -> Result<bool> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if args.seed.is_some() {
        cfg.seed = args.seed;
    }
    let report = run_scenario(&cfg, Some(scenario))?;
    if verbose > 0 {
        eprint!("{}", report.summary());
        eprintln!("runtime: {:.3}s", report.runtime.as_secs_f64());
    }
    emit_report(&report, args.format, args.out.as_deref())?;
    Ok(report.passed())
}

/// Parses `argv` (including the program name) and runs the subcommand.
pub fn parse_and_run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (args, scenario) = match &cli.command {
        Command::ListInstances => {
            return match list_instances() {
                Ok(text) => {
                    print!("{text}");
                    0
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    2
                }
            };
        }
        Command::VerifyModulus(a) => (a, Scenario::ModulusCheck),
        Command::CertifyNr(a) => (a, Scenario::Nr),
        Command::CertifyNrClosure(a) => (a, Scenario::NrClosure),
        Command::CertifyXuMeta(a) => (a, Scenario::XuMeta),
        Command::CertifyXuRoc(a) => (a, Scenario::XuRoc),
        Command::LiminfCheck(a) => (a, Scenario::LiminfCheck),
    };
    match run(args, scenario, cli.verbose) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
