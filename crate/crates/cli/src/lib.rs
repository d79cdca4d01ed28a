//! Command-line driver: parses arguments and the optional config file,
//! dispatches to the commands and maps outcomes to exit codes.
//!
//! Exit codes: 0 success, 1 configuration, usage or fatal error, 2 some rows
//! failed (flagged in the output), 3 self-check failure.

pub mod commands;
pub mod config;
pub mod output;
pub mod selfcheck;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde_json::json;

use commands::{CommandError, Outcome, Which};
use config::{ConfigError, Format, LoadedConfig};
use output::{Output, OUT_DIR_ENV};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_PARTIAL: i32 = 2;
pub const EXIT_SELFCHECK: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "selfenergy", version, about = "Surface-dependent electron self-energy between parallel plates")]
pub struct Cli {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (default: $SELFENERGY_OUT_DIR, else the current directory).
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Significant digits of emitted numbers.
    #[arg(long, global = true)]
    pub precision: Option<usize>,
    /// Monte-Carlo seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Energy shift over a grid of positions.
    Shift {
        /// start:stop:count, optionally :log.
        #[arg(long)]
        zeta_grid: Option<String>,
    },
    /// Static and dynamical forces, field modulations and M over a grid.
    Forces {
        #[arg(long)]
        zeta_grid: Option<String>,
    },
    /// Data behind one of the figures.
    Figure {
        #[arg(value_enum)]
        which: Which,
    },
    /// Runs the embedded oracle suite.
    Selfcheck {
        #[arg(long, hide = true, default_value_t = 0.0)]
        perturb: f64,
    },
}

fn load(cli: &Cli) -> Result<LoadedConfig, ConfigError> {
    let mut cfg = match &cli.config {
        Some(p) => LoadedConfig::from_path(p)?,
        None => LoadedConfig::defaults(),
    };
    let c = &mut cfg.config;
    if let Some(f) = cli.format {
        c.output.format = f;
    }
    if let Some(p) = cli.precision {
        if !(1..=17).contains(&p) {
            return Err(ConfigError::Invalid {
                origin: "--precision".into(),
                line: None,
                message: "must be between 1 and 17 significant digits".into(),
            });
        }
        c.output.precision = p;
    }
    if let Some(s) = cli.seed {
        c.uncertainty.seed = s;
    }
    if let Some(d) = &cli.out_dir {
        c.output.dir = Some(d.clone());
    }
    Ok(cfg)
}

fn output_for(cfg: &LoadedConfig) -> Output {
    let dir = cfg
        .config
        .output
        .dir
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    Output {
        dir,
        format: cfg.config.output.format,
        digits: cfg.config.output.precision,
    }
}

fn execute(cli: &Cli, cfg: &LoadedConfig) -> Result<i32, CommandError> {
    let (name, outcome): (&str, Outcome) = match &cli.command {
        Command::Shift { zeta_grid } => ("shift", commands::shift(cfg, zeta_grid.as_deref())?),
        Command::Forces { zeta_grid } => ("forces", commands::forces(cfg, zeta_grid.as_deref())?),
        Command::Figure { which } => (which.name(), commands::figure(cfg, *which)?),
        Command::Selfcheck { perturb } => return Ok(run_selfcheck(*perturb)),
    };
    // the run record omits the output directory so that identical runs
    // written to different places stay byte-identical
    let mut recorded = cfg.config.clone();
    recorded.output.dir = None;
    let run = json!({ "config": recorded });
    let paths = output_for(cfg).write(name, &outcome.datasets, run)?;
    for p in &paths {
        println!("{}", p.display());
    }
    if outcome.failures > 0 {
        eprintln!("{} row(s) failed; see the error column", outcome.failures);
        return Ok(EXIT_PARTIAL);
    }
    Ok(EXIT_OK)
}

fn run_selfcheck(perturb: f64) -> i32 {
    let checks = selfcheck::run(perturb);
    for c in &checks {
        println!(
            "{} {}: error {:.3e} (tolerance {:.1e}); {}",
            if c.passed() { "PASS" } else { "FAIL" },
            c.name,
            c.measured,
            c.tolerance,
            c.detail
        );
    }
    if checks.iter().all(selfcheck::Check::passed) {
        EXIT_OK
    } else {
        EXIT_SELFCHECK
    }
}

/// Runs the command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return EXIT_CONFIG;
        }
    }
    let cfg = match load(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    match execute(&cli, &cfg) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}
