mod cache;
mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use commands::{Failure, Output};
use config::RunConfig;

/// Exact engine for root-system eigenpolynomials, the deformed-derivative
/// intertwiner, kernel series, and their classical scaling limits.
#[derive(Parser)]
#[command(name = "opdam", version, disable_help_subcommand = true)]
struct Cli {
    /// Path to the JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (defaults to stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format, json or csv; overrides the config.
    #[arg(long, global = true)]
    format: Option<String>,
    /// Worker threads for the sweeps.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Seed for spectral-direction perturbations; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compute one eigenpolynomial with its probability certificate.
    Epoly,
    /// Dump the polynomial intertwining operator stage by stage.
    DunklV,
    /// Evaluate the truncated kernel series on the configured grid.
    Expw,
    /// Produce scaling-limit, moment, and symmetric-limit error tables.
    Limit,
    /// Emit orbit measures at the configured lattice scales.
    Measure,
    /// Run the invariant suites and report one line per check.
    Verify,
    /// Rank-one closed forms: exact oracle, float oracle, classical limit.
    Rankone,
}

fn load_config(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path).map_err(Failure::Config)?,
        None => {
            if !matches!(cli.command, Cmd::Verify) {
                return Err(Failure::Config("--config is required".into()));
            }
            serde_json::from_str(r#"{"system":"A1"}"#).expect("default config")
        }
    };
    if let Some(f) = &cli.format {
        cfg.format = f.clone();
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(out) = &cli.out {
        cfg.out = Some(out.display().to_string());
    }
    cfg.validate().map_err(Failure::Config)?;
    Ok(cfg)
}

fn write_output(cfg: &RunConfig, text: &str) -> Result<(), Failure> {
    match &cfg.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::Config(format!("cannot write {}: {}", path, e))),
        None => {
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| Failure::Config(format!("cannot write output: {}", e)))
        }
    }
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    let cfg = load_config(cli)?;
    let out = match cli.command {
        Cmd::Epoly => commands::cmd_epoly(&cfg)?,
        Cmd::DunklV => commands::cmd_dunkl_v(&cfg)?,
        Cmd::Expw => commands::cmd_expw(&cfg)?,
        Cmd::Limit => commands::cmd_limit(&cfg)?,
        Cmd::Measure => commands::cmd_measure(&cfg)?,
        Cmd::Verify => commands::cmd_verify(&cfg)?,
        Cmd::Rankone => commands::cmd_rankone(&cfg)?,
    };
    write_output(&cfg, &out.text)?;
    Ok(out)
}

fn main() {
    let cli = Cli::parse();
    if let Some(w) = cli.workers {
        // A second init in the same process is harmless; keep the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(w).build_global();
    }
    match run(&cli) {
        Ok(out) if out.ok => {}
        Ok(_) => std::process::exit(1),
        Err(f) => {
            let record = serde_json::json!({
                "error": { "kind": f.kind(), "message": f.message() }
            });
            println!("{}", record);
            eprintln!("error ({}): {}", f.kind(), f.message());
            std::process::exit(i32::from(f.code()));
        }
    }
}
