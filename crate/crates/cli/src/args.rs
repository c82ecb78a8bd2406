//! Command-line flags.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use nbs_core::{
    Connectivity, EngineConfig, NamedConfig, OrientationSet, SensorModel, Weights,
};

use crate::mapgen::MapKind;
use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "nbs", version, about = "Next-Best-Smell coverage simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one coverage run.
    Run(RunArgs),
    /// Run all thirteen weight configurations on one map.
    Sweep(SweepArgs),
    /// Batch of random obstacle grids of increasing size.
    Randgrid(RandgridArgs),
    /// Write a synthetic map.
    Genmap(GenmapArgs),
}

/// Planner and sensor settings shared by the simulation commands.
#[derive(Debug, Clone, Args)]
pub struct PlannerArgs {
    /// Weight configuration A-M, or "custom" together with --weights [default: E].
    #[arg(long)]
    pub config: Option<String>,
    /// Custom singleton weights x1,x2,x3 (information gain, travel distance, sensing time).
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pub weights: Option<Vec<f64>>,
    /// Pair synergy bonus for custom weights.
    #[arg(long, default_value_t = 0.1)]
    pub synergy: f64,
    /// Sensor range in meters [default: 10, randgrid: 30].
    #[arg(long = "rmax-m")]
    pub rmax_m: Option<f64>,
    #[arg(long = "phimax-deg", default_value_t = 180.0)]
    pub phimax_deg: f64,
    #[arg(long = "setup-s", default_value_t = 6.0)]
    pub setup_s: f64,
    #[arg(long = "sweep-s-per-deg", default_value_t = 1.0 / 3.0)]
    pub sweep_s_per_deg: f64,
    #[arg(long, default_value_t = 4)]
    pub orientations: usize,
    #[arg(long, default_value_t = 8)]
    pub connectivity: usize,
    #[arg(long = "speed-mps", default_value_t = 1.0)]
    pub speed_mps: f64,
    #[arg(long = "target-coverage", default_value_t = 1.0)]
    pub target_coverage: f64,
}

impl PlannerArgs {
    pub fn weights(&self) -> Result<Weights, CliError> {
        let config = self.config.as_deref();
        let custom = config.is_some_and(|c| c.eq_ignore_ascii_case("custom"));
        match (&self.weights, config) {
            (Some(w), None) => custom_weights(w, self.synergy),
            (Some(w), Some(_)) if custom => custom_weights(w, self.synergy),
            (Some(_), Some(c)) => Err(CliError::Config(format!(
                "--weights requires --config custom, got --config {c}"
            ))),
            (None, _) if custom => {
                Err(CliError::Config("--config custom requires --weights".into()))
            }
            (None, c) => Ok(Weights::named(c.unwrap_or("E").parse::<NamedConfig>()?)),
        }
    }

    pub fn sensor(&self, default_range: f64) -> Result<SensorModel, CliError> {
        SensorModel::new(
            self.rmax_m.unwrap_or(default_range),
            self.phimax_deg,
            self.setup_s,
            self.sweep_s_per_deg,
        )
        .map_err(|e| CliError::Config(e.to_string()))
    }

    /// Engine settings for `weights`, which may differ from `--config` in a sweep.
    pub fn engine_config(&self, weights: &Weights, default_range: f64) -> Result<EngineConfig, CliError> {
        let orientations = OrientationSet::new(self.orientations)
            .map_err(|e| CliError::Config(e.to_string()))?;
        let connectivity = Connectivity::from_count(self.connectivity).ok_or_else(|| {
            CliError::Config(format!("connectivity must be 4 or 8, got {}", self.connectivity))
        })?;
        let config = EngineConfig::new(weights)?
            .with_sensor(self.sensor(default_range)?)
            .with_orientations(orientations)
            .with_connectivity(connectivity)
            .with_speed(self.speed_mps)
            .with_target_coverage(self.target_coverage);
        config.validate()?;
        Ok(config)
    }
}

fn custom_weights(w: &[f64], synergy: f64) -> Result<Weights, CliError> {
    let [x1, x2, x3] = w[..] else {
        return Err(CliError::Config(format!(
            "--weights needs three values, got {}",
            w.len()
        )));
    };
    Ok(Weights::custom([x1, x2, x3], synergy)?)
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub map: PathBuf,
    #[command(flatten)]
    pub planner: PlannerArgs,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Write a PPM image of the map after every step.
    #[arg(long)]
    pub snapshots: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub map: PathBuf,
    #[command(flatten)]
    pub planner: PlannerArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RandgridArgs {
    /// Grid side lengths in cells.
    #[arg(long, value_delimiter = ',', default_value = "3,10,20,30,40,50,60,70,80,90")]
    pub sizes: Vec<usize>,
    #[arg(long = "grids-per-size", default_value_t = 10)]
    pub grids_per_size: usize,
    #[arg(long = "obstacle-ratio", default_value_t = 0.1)]
    pub obstacle_ratio: f64,
    /// Master seed; grid i of size n uses seed + 1000 n + i.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub planner: PlannerArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenmapArgs {
    #[arg(long, value_enum)]
    pub kind: MapKind,
    /// Width in cells (and height, unless --height is given).
    #[arg(long)]
    pub size: usize,
    /// Height in cells [default: size, corridor: 10].
    #[arg(long)]
    pub height: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long = "obstacle-ratio", default_value_t = 0.1)]
    pub obstacle_ratio: f64,
    /// Meters per cell [default: 0.5 for corridor, 1.0 otherwise].
    #[arg(long)]
    pub resolution: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}
