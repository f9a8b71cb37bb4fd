use std::ops::Range;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use clustered_ndt::commands::{
    cmd_build_map, cmd_compare, cmd_eval_dynamics, cmd_localize, cmd_simulate, cmd_update_map, RunManifest, SceneSource,
};
use clustered_ndt::io::DynamicLabelSet;
use clustered_ndt::occupancy::UpdateMode;
use clustered_ndt::{Config, Error, Result};

/// Clustered NDT occupancy mapping experiments.
///
/// Exit codes: 0 success, 2 bad input, 3 failure flagged in the report.
#[derive(Parser, Debug)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Map update mode.
    #[arg(long, global = true)]
    mode: Option<UpdateMode>,
    /// Adaptation factor in [0, 0.5].
    #[arg(long, global = true)]
    eta: Option<f64>,
    /// Voxel edge length in meters.
    #[arg(long, global = true)]
    voxel_size: Option<f64>,
    /// TOML or JSON configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file, or directory for `simulate`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print the effective configuration as TOML and exit.
    #[arg(long, global = true)]
    print_config: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a map from a sequence directory.
    BuildMap {
        #[arg(long)]
        scans: PathBuf,
        /// Scan range `a..b`.
        #[arg(long, value_parser = parse_range)]
        frames: Option<Range<usize>>,
    },
    /// Fuse a later sequence into an existing map.
    UpdateMap {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        scans: PathBuf,
        #[arg(long, value_parser = parse_range)]
        frames: Option<Range<usize>>,
    },
    /// Dynamic cell density report (CSV).
    EvalDynamics {
        #[arg(long)]
        map: PathBuf,
        /// Defaults to the number of scans the map integrated.
        #[arg(long)]
        seq_len: Option<u64>,
        #[arg(long, default_value = "252-259")]
        labels: String,
    },
    /// Render a scenario file or shipped scenario name to a sequence directory.
    Simulate {
        #[arg(long)]
        scene: String,
        /// Only emit the scans of this phase.
        #[arg(long)]
        phase: Option<String>,
    },
    /// Monte Carlo localization against a map, with an ATE report.
    Localize {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        scans: PathBuf,
        /// Ground-truth CSV; defaults to the sequence's own.
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Per-cell difference summary of two maps.
    Compare { a: PathBuf, b: PathBuf },
}

fn parse_range(s: &str) -> std::result::Result<Range<usize>, String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("expected a..b, got {s:?}"))?;
    let a = a.parse().map_err(|e| format!("{a:?}: {e}"))?;
    let b = b.parse().map_err(|e| format!("{b:?}: {e}"))?;
    Ok(a..b)
}

fn effective_config(cli: &Cli) -> Result<Config> {
    let mut config = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(m) = cli.mode {
        config.occupancy.update_mode = m;
    }
    if let Some(eta) = cli.eta {
        config.sensor.eta = eta;
    }
    if let Some(v) = cli.voxel_size {
        config.map.voxel_size = v;
    }
    if let Some(s) = cli.seed {
        config.seed = s;
    }
    config.validate()?;
    Ok(config)
}

fn run(cli: &Cli) -> Result<Option<RunManifest>> {
    let config = effective_config(cli)?;
    if cli.print_config {
        print!("{}", config.to_toml_string());
        return Ok(None);
    }
    let out = cli
        .out
        .as_deref()
        .ok_or_else(|| Error::Input("--out is required".into()))?;
    let m = match &cli.command {
        Command::BuildMap { scans, frames } => cmd_build_map(&config, scans, frames.clone(), out)?,
        Command::UpdateMap { map, scans, frames } => cmd_update_map(&config, map, scans, frames.clone(), out)?,
        Command::EvalDynamics { map, seq_len, labels } => {
            cmd_eval_dynamics(&config, map, *seq_len, &DynamicLabelSet::parse(labels)?, out)?
        }
        Command::Simulate { scene, phase } => {
            cmd_simulate(&config, &SceneSource::parse(scene), phase.as_deref(), cli.seed, out)?
        }
        Command::Localize {
            map,
            scans,
            truth,
            steps,
        } => cmd_localize(&config, map, scans, truth.as_deref(), *steps, out)?,
        Command::Compare { a, b } => cmd_compare(&config, a, b, out)?,
    };
    Ok(Some(m))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Some(m)) if m.failed() => {
            eprintln!("{}: {:?}", m.command, m.status);
            ExitCode::from(3)
        }
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
