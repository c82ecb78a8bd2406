//! The four subcommands. Each returns `Ok(())` or a [`CliError`] whose exit
//! code the binary reports.

use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use nbs_core::{
    coverage_ratio, generate_random_grid, parse_map, run_coverage, serialize_map, Engine,
    GridMap, NamedConfig, RunResult, StepOutcome, Weights,
};

use crate::args::{GenmapArgs, PlannerArgs, RandgridArgs, RunArgs, SweepArgs};
use crate::mapgen::{self, MapKind, MapSpec};
use crate::output::{self, RunSummary, SweepRow};
use crate::CliError;

/// Sensor range when `--rmax-m` is absent.
pub const DEFAULT_RANGE_M: f64 = 10.0;
/// Sensor range for the random-grid batch when `--rmax-m` is absent.
pub const RANDGRID_RANGE_M: f64 = 30.0;

pub fn load_map(path: &Path) -> Result<GridMap, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_map(&text).map_err(|e| CliError::Map(format!("{}: {e}", path.display())))
}

pub fn run(args: &RunArgs) -> Result<(), CliError> {
    let map = load_map(&args.map)?;
    let weights = args.planner.weights()?;
    let config = args.planner.engine_config(&weights, DEFAULT_RANGE_M)?;
    let label = weights.label.to_string();
    let connectivity = config.connectivity;
    let target = config.target_coverage;
    output::ensure_dir(&args.out)?;

    let snapshots = args.out.join("snapshots");
    if args.snapshots {
        output::ensure_dir(&snapshots)?;
    }
    let initial = map.clone();
    let mut engine = Engine::new(map, config)?;
    while coverage_ratio(engine.map()) < target {
        if engine.step()? == StepOutcome::Done {
            break;
        }
        if args.snapshots {
            let n = engine.steps().len();
            let ppm = output::snapshot_ppm(engine.map(), engine.robot(), connectivity);
            output::write_file(&snapshots.join(format!("step_{n:04}.ppm")), ppm)?;
        }
    }
    let result = engine.finish();

    output::write_file(&args.out.join("run.csv"), output::run_csv(&result.steps))?;
    output::write_file(&args.out.join("timing.csv"), output::timing_csv(&result.steps))?;
    let summary = RunSummary::new(label.clone(), &initial, &result);
    output::write_file(&args.out.join("summary.json"), output::to_json(&summary)?)?;
    println!("{}", SweepRow::new(label, &result).display_line());
    Ok(())
}

/// Runs every named configuration on `map`, in table order.
pub fn sweep_rows(map: &GridMap, planner: &PlannerArgs) -> Result<Vec<SweepRow>, CliError> {
    NamedConfig::ALL
        .par_iter()
        .map(|&named| {
            let weights = Weights::named(named);
            let config = planner.engine_config(&weights, DEFAULT_RANGE_M)?;
            let result = run_coverage(map.clone(), config)?;
            Ok(SweepRow::new(named.to_string(), &result))
        })
        .collect()
}

pub fn sweep(args: &SweepArgs) -> Result<(), CliError> {
    let map = load_map(&args.map)?;
    let rows = sweep_rows(&map, &args.planner)?;
    output::ensure_dir(&args.out)?;
    output::write_file(&args.out.join("sweep.csv"), output::sweep_csv(&rows))?;
    for r in &rows {
        println!("{}", r.display_line());
    }
    Ok(())
}

/// Seed of grid `index` among those of side `size`.
pub fn grid_seed(master: u64, size: usize, index: usize) -> u64 {
    master + 1000 * size as u64 + index as u64
}

#[derive(Debug, Clone)]
pub struct GridRun {
    pub size: usize,
    pub index: usize,
    pub seed: u64,
    pub result: RunResult,
    /// Wall-clock seconds spent choosing poses.
    pub planning_time: f64,
    /// Wall-clock seconds for the whole run, including travel and scan updates.
    pub wall_time: f64,
}

pub fn randgrid_runs(args: &RandgridArgs) -> Result<Vec<GridRun>, CliError> {
    if args.sizes.is_empty() {
        return Err(CliError::Config("--sizes must not be empty".into()));
    }
    if args.grids_per_size == 0 {
        return Err(CliError::Config("--grids-per-size must be positive".into()));
    }
    let weights = args.planner.weights()?;
    let config = args.planner.engine_config(&weights, RANDGRID_RANGE_M)?;
    let jobs: Vec<(usize, usize)> = args
        .sizes
        .iter()
        .flat_map(|&s| (0..args.grids_per_size).map(move |i| (s, i)))
        .collect();
    let mut runs = jobs
        .par_iter()
        .map(|&(size, index)| {
            let seed = grid_seed(args.seed, size, index);
            let map = generate_random_grid(size, args.obstacle_ratio, seed)
                .map_err(|e| CliError::Config(e.to_string()))?;
            let clock = Instant::now();
            let result = run_coverage(map, config.clone())?;
            let wall_time = clock.elapsed().as_secs_f64();
            Ok(GridRun {
                size,
                index,
                seed,
                planning_time: result.planning_time(),
                wall_time,
                result,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    runs.sort_by_key(|r| (r.size, r.index));
    Ok(runs)
}

fn by_size(runs: &[GridRun]) -> Vec<(usize, &[GridRun])> {
    runs.chunk_by(|a, b| a.size == b.size)
        .map(|chunk| (chunk[0].size, chunk))
        .collect()
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    sum / n as f64
}

pub fn randgrid_csv(runs: &[GridRun]) -> String {
    let mut out = String::from(
        "size,grid,seed,sensing_ops,coverage_satisfied,final_coverage,uncovered_cells,\
travel_time_s,scanning_time_s,total_time_s\n",
    );
    for r in runs {
        out.push_str(&format!(
            "{},{},{},{},{},{:.6},{},{:.2},{:.2},{:.2}\n",
            r.size,
            r.index,
            r.seed,
            r.result.total_sensing_ops,
            output::yes_no(r.result.coverage_satisfied),
            r.result.final_coverage,
            r.result.uncovered_cells.len(),
            r.result.total_travel_time,
            r.result.total_sensing_time,
            r.result.total_time,
        ));
    }
    out
}

pub fn randgrid_summary_csv(runs: &[GridRun]) -> String {
    let mut out = String::from("size,grids,mean_sensing_ops,mean_total_time_s,grids_fully_covered\n");
    for (size, group) in by_size(runs) {
        out.push_str(&format!(
            "{},{},{:.2},{:.2},{}\n",
            size,
            group.len(),
            mean(group.iter().map(|r| r.result.total_sensing_ops as f64)),
            mean(group.iter().map(|r| r.result.total_time)),
            group.iter().filter(|r| r.result.coverage_satisfied).count(),
        ));
    }
    out
}

pub fn randgrid_timing_csv(runs: &[GridRun]) -> String {
    let mut out = String::from("size,grids,mean_planning_time_s,max_planning_time_s,mean_wall_time_s\n");
    for (size, group) in by_size(runs) {
        out.push_str(&format!(
            "{},{},{:.3},{:.3},{:.3}\n",
            size,
            group.len(),
            mean(group.iter().map(|r| r.planning_time)),
            group.iter().map(|r| r.planning_time).fold(0.0, f64::max),
            mean(group.iter().map(|r| r.wall_time)),
        ));
    }
    out
}

pub fn randgrid(args: &RandgridArgs) -> Result<(), CliError> {
    let runs = randgrid_runs(args)?;
    output::ensure_dir(&args.out)?;
    output::write_file(&args.out.join("randgrid.csv"), randgrid_csv(&runs))?;
    output::write_file(&args.out.join("randgrid_summary.csv"), randgrid_summary_csv(&runs))?;
    output::write_file(&args.out.join("randgrid_timing.csv"), randgrid_timing_csv(&runs))?;
    for (size, group) in by_size(&runs) {
        println!(
            "size {size:>3}  mean sensing ops {:>8.2}  mean planning time {:>8.3} s",
            mean(group.iter().map(|r| r.result.total_sensing_ops as f64)),
            mean(group.iter().map(|r| r.planning_time)),
        );
    }
    Ok(())
}

pub fn genmap(args: &GenmapArgs) -> Result<(), CliError> {
    let height = args.height.unwrap_or(match args.kind {
        MapKind::Corridor => 10,
        _ => args.size,
    });
    let resolution = args.resolution.unwrap_or(match args.kind {
        MapKind::Corridor => 0.5,
        _ => 1.0,
    });
    let spec = MapSpec {
        kind: args.kind,
        width: args.size,
        height,
        seed: args.seed,
        obstacle_ratio: args.obstacle_ratio,
        resolution,
    };
    let map = mapgen::generate(&spec).map_err(|e| CliError::Config(e.to_string()))?;
    output::write_file(&args.out, serialize_map(&map))
}
