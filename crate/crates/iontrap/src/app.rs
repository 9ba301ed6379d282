//! Command-line entry point: `iontrap run <config> [--out DIR] [--threads N]`.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use crate::config::{Params, RunConfig};
use crate::error::RunError;
use crate::experiments::{run_experiment, tolerances};
use crate::table::write_outputs;

#[derive(Parser, Debug)]
#[command(name = "iontrap", version, about = "Trapped-ion perturbation experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the experiment described by a configuration file.
    Run {
        config: PathBuf,
        /// Output directory for the CSV tables and metadata.json.
        #[arg(long, default_value = "results")]
        out: PathBuf,
        /// Worker threads for parameter sweeps (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
}

/// Summary of a successful run.
#[derive(Debug)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
}

fn toml_to_json(t: &toml::Table) -> Value {
    serde_json::to_value(t).unwrap_or(Value::Null)
}

fn metadata(cfg: &RunConfig, summary: &Value, diagnostic: Option<&RunError>) -> Value {
    let params = match cfg.params {
        Params::Full(p) => json!({
            "set": "full",
            "nu": p.nu, "omega_ge": p.omega_ge, "omega_L": p.omega_l, "Omega_R": p.omega_r, "eta": p.eta,
        }),
        Params::Reduced(b) => json!({
            "set": "reduced",
            "nu": b.nu, "delta_breve": b.delta_breve, "eta_breve": b.eta_breve, "lambda": b.lambda,
        }),
    };
    json!({
        "program": "iontrap",
        "version": env!("CARGO_PKG_VERSION"),
        "core_version": iontrap_core::VERSION,
        "experiment": cfg.experiment,
        "config": toml_to_json(&cfg.echo),
        "params": params,
        "space": { "n_max": cfg.space.n_max(), "interior_margin": cfg.space.interior_margin() },
        "tolerances": tolerances(),
        "summary": summary,
        "diagnostic": diagnostic.map(|d| d.to_string()),
    })
}

/// Runs one configuration. Tables are written even when a self-check fails;
/// the failure is then returned as the error.
pub fn run(config: &Path, out: &Path, threads: Option<usize>) -> Result<RunReport, RunError> {
    let cfg = RunConfig::from_path(config)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(RunError::Config("--threads must be at least 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| RunError::Io(std::io::Error::other(e)))?;
    let output = pool.install(|| run_experiment(&cfg))?;
    let meta = metadata(&cfg, &output.summary, output.diagnostic.as_ref());
    let files = write_outputs(out, &output.tables, &meta)?;
    match output.diagnostic {
        Some(d) => Err(d),
        None => Ok(RunReport { files }),
    }
}

/// Parses arguments, runs, reports on stdout/stderr and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Command::Run { config, out, threads } => match run(&config, &out, threads) {
            Ok(report) => {
                for f in &report.files {
                    println!("wrote {}", f.display());
                }
                0
            }
            Err(e) => {
                eprintln!("{e}");
                e.exit_code()
            }
        },
    }
}
