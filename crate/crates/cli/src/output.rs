//! File formats: CSV tables with fixed decimals, JSON summaries and PPM
//! snapshots.
//!
//! Wall-clock measurements never go into the CSV or JSON files that describe
//! a run; they live in separate timing files so repeated runs are
//! byte-identical.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use nbs_core::{frontier_cells, CellState, Connectivity, GridMap, Pose, RunResult, StepRecord};

use crate::CliError;

pub const RUN_HEADER: &str = "step,x,y,theta_deg,phi_deg,info_gain,travel_distance_m,\
travel_time_s,sensing_time_s,cumulative_coverage,candidates_evaluated";

pub const SWEEP_HEADER: &str =
    "configuration,coverage_satisfied,sensing_ops,travel_time_s,scanning_time_s,total_time_min";

pub fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

pub fn run_csv(steps: &[StepRecord]) -> String {
    let mut out = String::from(RUN_HEADER);
    out.push('\n');
    for s in steps {
        out.push_str(&format!(
            "{},{},{},{:.1},{:.6},{},{:.6},{:.6},{:.6},{:.6},{}\n",
            s.index,
            s.pose.cell.x,
            s.pose.cell.y,
            s.pose.theta_degrees(),
            s.phi_used,
            s.info_gain,
            s.travel_distance,
            s.travel_time,
            s.sensing_time,
            s.cumulative_coverage,
            s.candidates_evaluated,
        ));
    }
    out
}

pub fn timing_csv(steps: &[StepRecord]) -> String {
    let mut out = String::from("step,decision_time_s\n");
    for s in steps {
        out.push_str(&format!("{},{:.6}\n", s.index, s.decision_time));
    }
    out
}

/// One row of the per-configuration results table.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub configuration: String,
    pub coverage_satisfied: bool,
    pub sensing_ops: usize,
    pub travel_time_s: f64,
    pub scanning_time_s: f64,
}

impl SweepRow {
    pub fn new(configuration: String, result: &RunResult) -> Self {
        Self {
            configuration,
            coverage_satisfied: result.coverage_satisfied,
            sensing_ops: result.total_sensing_ops,
            travel_time_s: result.total_travel_time,
            scanning_time_s: result.total_sensing_time,
        }
    }

    pub fn total_time_min(&self) -> f64 {
        (self.travel_time_s + self.scanning_time_s) / 60.0
    }

    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{:.2},{:.2},{:.2}",
            self.configuration,
            yes_no(self.coverage_satisfied),
            self.sensing_ops,
            self.travel_time_s,
            self.scanning_time_s,
            self.total_time_min(),
        )
    }

    /// Human-readable line in the order of the csv columns.
    pub fn display_line(&self) -> String {
        format!(
            "config {:<6} coverage satisfied {:<3}  sensing ops {:>5}  travel {:>10.2} s  scanning {:>10.2} s  total {:>8.2} min",
            self.configuration,
            yes_no(self.coverage_satisfied),
            self.sensing_ops,
            self.travel_time_s,
            self.scanning_time_s,
            self.total_time_min(),
        )
    }
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_line());
        out.push('\n');
    }
    out
}

#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub configuration: String,
    pub map_width: usize,
    pub map_height: usize,
    pub free_cells: usize,
    pub coverage_satisfied: bool,
    pub final_coverage: f64,
    pub total_sensing_ops: usize,
    pub total_travel_time_s: f64,
    pub total_sensing_time_s: f64,
    pub total_time_s: f64,
    pub total_time_min: f64,
    /// `[x, y]` pairs, row-major.
    pub uncovered_cells: Vec<[usize; 2]>,
}

impl RunSummary {
    pub fn new(configuration: String, map: &GridMap, result: &RunResult) -> Self {
        Self {
            configuration,
            map_width: map.width(),
            map_height: map.height(),
            free_cells: map.free_count(),
            coverage_satisfied: result.coverage_satisfied,
            final_coverage: result.final_coverage,
            total_sensing_ops: result.total_sensing_ops,
            total_travel_time_s: result.total_travel_time,
            total_sensing_time_s: result.total_sensing_time,
            total_time_s: result.total_time,
            total_time_min: result.total_time / 60.0,
            uncovered_cells: result.uncovered_cells.iter().map(|c| [c.x, c.y]).collect(),
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

const BLACK: [u8; 3] = [0, 0, 0];
const WHITE: [u8; 3] = [255, 255, 255];
const GRAY: [u8; 3] = [128, 128, 128];
const RED: [u8; 3] = [255, 0, 0];
const BLUE: [u8; 3] = [0, 0, 255];

/// Binary PPM, one pixel per cell.
pub fn snapshot_ppm(map: &GridMap, robot: Pose, connectivity: Connectivity) -> Vec<u8> {
    let mut pixels: Vec<[u8; 3]> = map
        .states()
        .iter()
        .map(|s| match s {
            CellState::Obstacle => BLACK,
            CellState::FreeUnscanned => WHITE,
            CellState::FreeScanned => GRAY,
        })
        .collect();
    for c in frontier_cells(map, connectivity) {
        pixels[map.index(c)] = BLUE;
    }
    pixels[map.index(robot.cell)] = RED;

    let mut out = format!("P6\n{} {}\n255\n", map.width(), map.height()).into_bytes();
    out.extend(pixels.iter().flatten());
    out
}

pub fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    let mut f = fs::File::create(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    f.write_all(contents.as_ref())
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn ensure_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}
