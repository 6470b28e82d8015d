use std::path::PathBuf;
use std::process::ExitCode;

use aquampc::cost::ControllerKind;
use aquampc::experiment::{horizon_sweep, noise_comparison, run_experiment, ExperimentConfig};
use aquampc::{Error, ErrorClass, Result};
use clap::{Parser, Subcommand};

/// Receding-horizon feeding control experiments for a tilapia growth model.
///
/// Settings are read from the JSON config (defaults when omitted), then from
/// AQUAMPC_* environment variables, then from the flags below.
#[derive(Debug, Parser)]
#[command(name = "aquampc", version)]
struct Cli {
    /// Experiment config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed of the actuator noise.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Controllers to run, e.g. mpc1,mpc3.
    #[arg(long, global = true, value_delimiter = ',')]
    controllers: Option<Vec<ControllerKind>>,
    /// Noise level in dB; also enables noise for `run`.
    #[arg(long = "snr-db", global = true)]
    snr_db: Option<f64>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compare the controllers on one configuration (default).
    Run,
    /// Sweep the prediction horizon.
    Sweep {
        /// Horizons to sweep, e.g. 1,3,5
        #[arg(long, value_delimiter = ',')]
        horizons: Option<Vec<usize>>,
    },
    /// Pair noise-free and noisy runs over several seeds.
    Noise {
        /// Noise seeds, e.g. 1,2,3
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
    },
    /// Print the effective configuration as JSON.
    Config,
}

fn configure(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(cli.config.as_deref(), std::env::vars())?;
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(workers) = cli.workers {
        cfg.workers = workers;
    }
    if let Some(kinds) = &cli.controllers {
        cfg.controllers = kinds.clone();
    }
    if let Some(db) = cli.snr_db {
        cfg.noise.snr_db = db;
        if matches!(cli.command, None | Some(Command::Run)) {
            cfg.noise.enabled = true;
        }
    }
    match &cli.command {
        Some(Command::Sweep { horizons: Some(h) }) => cfg.sweep.horizons = h.clone(),
        Some(Command::Noise { seeds: Some(s) }) => cfg.noise.seeds = s.clone(),
        _ => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

fn fmt_opt(v: Option<f64>, prec: usize) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.prec$}"))
}

fn execute(cli: &Cli) -> Result<()> {
    let cfg = configure(cli)?;
    if let Some(Command::Config) = cli.command {
        println!("{}", cfg.to_json_pretty()?);
        return Ok(());
    }
    let exp = cfg.resolve()?;
    let files = match &cli.command {
        None | Some(Command::Run) => {
            let out = run_experiment(&exp)?;
            println!("controller  mse        final_g   feed_g    profit     profit_%  fcr");
            for r in &out.rows {
                println!(
                    "{:<10}  {:<9.4}  {:<8.2}  {:<8.2}  {:<9.2}  {:<8}  {}",
                    r.controller.name(),
                    r.mse,
                    r.final_weight_g,
                    r.feed_g,
                    r.profit,
                    fmt_opt(r.profit_pct, 2),
                    fmt_opt(r.fcr, 3)
                );
            }
            out.files
        }
        Some(Command::Sweep { .. }) => {
            let out = horizon_sweep(&exp, &exp.config.sweep.horizons)?;
            println!("controller  N    mse        feed_g    elapsed_s");
            for r in &out.rows {
                println!(
                    "{:<10}  {:<3}  {:<9.4}  {:<8.2}  {:.4}",
                    r.controller.name(),
                    r.n,
                    r.mse,
                    r.feed_g,
                    r.elapsed_s
                );
            }
            out.files
        }
        Some(Command::Noise { .. }) => {
            let out = noise_comparison(&exp, exp.config.noise.snr_db, &exp.config.noise.seeds)?;
            println!("controller  seed  noise   mse        final_g   d_mse");
            for r in &out.rows {
                println!(
                    "{:<10}  {:<4}  {:<6}  {:<9.4}  {:<8.2}  {}",
                    r.controller.name(),
                    r.seed,
                    r.noise_db.map_or("off".to_string(), |d| format!("{d}dB")),
                    r.mse,
                    r.final_weight_g,
                    fmt_opt(r.delta_mse, 4)
                );
            }
            out.files
        }
        Some(Command::Config) => unreachable!(),
    };
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e.class() {
        ErrorClass::Config => 2,
        ErrorClass::Solver => 3,
        ErrorClass::Io => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("aquampc: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
