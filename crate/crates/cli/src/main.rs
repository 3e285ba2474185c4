//! `simulate`: runs declarative pseudospin experiments and persists their
//! traces, spectra and fits.
//!
//! Exit codes: 0 success, 1 run failure, 2 config error.

mod config;
mod output;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use pseudospin::io::content_hash;
use pseudospin::params::preset_table;
use pseudospin::{PhysicalParams, PAPER_2016};

use config::ExperimentConfig;
use output::RunDir;

/// Environment variable giving the default worker count.
const THREADS_ENV: &str = "SIMULATE_THREADS";

#[derive(Parser)]
#[command(name = "simulate", version, about = "Collective spin-cavity simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run {
        config: PathBuf,
        /// Worker threads; overrides the config and SIMULATE_THREADS.
        #[arg(short = 'j', long)]
        threads: Option<usize>,
        /// Output root; overrides `output_dir` in the config.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print the parameter presets with provenance notes.
    Presets {
        /// Emit JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Parse and check a config without running it.
    Validate { config: PathBuf },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Presets { json } => match presets(json) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(1)
            }
        },
        Command::Validate { config } => match ExperimentConfig::load(&config) {
            Ok(cfg) => {
                let p = cfg.physical();
                println!("{}: ok ({} experiment)", config.display(), cfg.kind);
                if let Ok(flags) = p.validate() {
                    println!(
                        "  2g sqrt(N) / 2pi = {:.6e} Hz, strong coupling: {}, high cooperativity: {}",
                        p.rabi_splitting() / std::f64::consts::TAU,
                        flags.strong_coupling,
                        flags.high_cooperativity
                    );
                }
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("config error in {}: {e}", config.display());
                ExitCode::from(2)
            }
        },
        Command::Run { config, threads, output } => {
            let mut cfg = match ExperimentConfig::load(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("config error in {}: {e}", config.display());
                    return ExitCode::from(2);
                }
            };
            if let Some(out) = output {
                cfg.output_dir = out;
            }
            match run(&cfg, threads) {
                Ok(0) => ExitCode::SUCCESS,
                Ok(n) => {
                    eprintln!("{n} run(s) failed; see manifest.json");
                    ExitCode::from(1)
                }
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(1)
                }
            }
        }
    }
}

fn thread_count(cli: Option<usize>, cfg: Option<usize>) -> Result<Option<usize>> {
    if let Some(n) = cli.or(cfg) {
        return Ok(Some(n));
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => {
            let n: usize = v.trim().parse().with_context(|| format!("{THREADS_ENV}={v:?} is not a count"))?;
            Ok((n > 0).then_some(n))
        }
        Err(_) => Ok(None),
    }
}

/// Runs the experiment and returns the number of recorded failures.
fn run(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<usize> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count(threads, cfg.parallelism)? {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().context("building worker pool")?;
    let kind = cfg.kind.as_str();
    // output location and pool size do not affect results
    let identity = serde_json::to_vec(&(&cfg.params, &cfg.experiment))?;
    let mut dir = RunDir::create(&cfg.output_dir, kind)?;
    log::info!("{kind}: writing to {} with {} worker(s)", dir.path().display(), pool.current_num_threads());
    let outcome = pool.install(|| run::execute(cfg, &mut dir))?;
    for f in &outcome.failures {
        log::warn!("{} [{}] {}: {}", f.label, f.index, f.stage, f.error);
    }
    let failures = outcome.failures.len();
    let root = dir.finish(kind, content_hash(&identity), outcome.failures, &outcome.summary)?;
    println!("{}", root.display());
    Ok(failures)
}

fn presets(json: bool) -> Result<()> {
    let table = preset_table(PAPER_2016)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&serde_json::json!({ PAPER_2016: table }))?);
        return Ok(());
    }
    let p = PhysicalParams::paper_2016();
    println!("{PAPER_2016}");
    for e in &table {
        println!("  {:<36} {:>14.6e} {:<6} {}", e.name, e.value, e.unit, e.provenance);
    }
    if let Ok(c) = p.cooperativity() {
        println!("  {:<36} {:>14.6e} {:<6} g^2 N / (kappa gamma)", "cooperativity (derived)", c, "");
    }
    Ok(())
}
