//! The Next-Best-Smell loop.
//!
//! Each step enumerates candidate poses on the scanned/unscanned frontier,
//! scores them with the Choquet integral over normalized utilities, travels
//! to the best one and performs its scan. The loop stops when no reachable
//! candidate would scan a new cell or the coverage target is met.

use std::cmp::Ordering;
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::grid_map::{
    coverage_ratio, frontier_cells, mark_scanned, Cell, Connectivity, GridMap, MapError,
    OrientationSet, Pose,
};
use crate::mcdm::{
    build_measure, choquet, normalize_utilities, ConfigLabel, FuzzyMeasure, McdmError,
    RawCriteria, UtilityVector, WeightConfig,
};
use crate::planner::{astar, shortest_distances, travel_time, DistanceField, Path};
use crate::sensing::{compute_fos, ScanSummary, SensingError, SensorModel, VisibilityCache};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Mcdm(#[from] McdmError),
    #[error(transparent)]
    Sensing(#[from] SensingError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("no candidates to select from")]
    NoCandidates,
    #[error("internal error: {0}")]
    Internal(String),
}

/// Everything a run needs besides the map.
#[derive(Debug, Clone)]
pub struct EngineConfig {
    pub label: ConfigLabel,
    pub measure: FuzzyMeasure<f64>,
    pub sensor: SensorModel,
    pub orientations: OrientationSet,
    pub connectivity: Connectivity,
    /// Meters per second.
    pub speed: f64,
    /// Stop once this fraction of free cells is scanned.
    pub target_coverage: f64,
}

impl EngineConfig {
    /// Defaults: 10 m range, 180° opening, 4 headings, 8-connected motion,
    /// 1 m/s, full coverage.
    pub fn new(weights: &WeightConfig<f64>) -> Result<Self, EngineError> {
        Ok(Self {
            label: weights.label,
            measure: build_measure(weights)?,
            sensor: SensorModel::default(),
            orientations: OrientationSet::new(4)?,
            connectivity: Connectivity::Eight,
            speed: 1.0,
            target_coverage: 1.0,
        })
    }

    pub fn with_sensor(mut self, sensor: SensorModel) -> Self {
        self.sensor = sensor;
        self
    }

    pub fn with_orientations(mut self, orientations: OrientationSet) -> Self {
        self.orientations = orientations;
        self
    }

    pub fn with_connectivity(mut self, connectivity: Connectivity) -> Self {
        self.connectivity = connectivity;
        self
    }

    pub fn with_speed(mut self, speed: f64) -> Self {
        self.speed = speed;
        self
    }

    pub fn with_target_coverage(mut self, target: f64) -> Self {
        self.target_coverage = target;
        self
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        self.sensor.validate()?;
        if !(self.speed > 0.0 && self.speed.is_finite()) {
            return Err(EngineError::Config(format!(
                "speed must be positive, got {}",
                self.speed
            )));
        }
        if !(self.target_coverage > 0.0 && self.target_coverage <= 1.0) {
            return Err(EngineError::Config(format!(
                "target coverage must be in (0, 1], got {}",
                self.target_coverage
            )));
        }
        Ok(())
    }
}

/// A pose under consideration for the next sensing operation.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub pose: Pose,
    /// Meters along the shortest path from the robot.
    pub distance: f64,
    pub scan: ScanSummary,
    pub utilities: UtilityVector<f64>,
    pub score: f64,
}

impl Candidate {
    fn raw(&self) -> RawCriteria<f64> {
        RawCriteria([
            self.scan.info_gain as f64,
            self.distance,
            self.scan.sensing_time,
        ])
    }
}

/// One executed sensing operation.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    /// 1-based.
    pub index: usize,
    pub pose: Pose,
    pub phi_used: f64,
    pub info_gain: usize,
    /// Meters.
    pub travel_distance: f64,
    pub travel_time: f64,
    pub sensing_time: f64,
    pub cumulative_coverage: f64,
    pub candidates_evaluated: usize,
    /// Wall-clock seconds spent enumerating and selecting candidates.
    pub decision_time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub steps: Vec<StepRecord>,
    pub total_sensing_ops: usize,
    pub total_travel_time: f64,
    pub total_sensing_time: f64,
    pub total_time: f64,
    pub coverage_satisfied: bool,
    pub final_coverage: f64,
    /// Free cells never scanned, row-major.
    pub uncovered_cells: Vec<Cell>,
}

impl RunResult {
    /// Sum of per-step decision times, in seconds.
    pub fn planning_time(&self) -> f64 {
        self.steps.iter().map(|s| s.decision_time).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StepOutcome {
    Step(StepRecord),
    Done,
}

fn compare_candidates(a: &Candidate, b: &Candidate) -> Ordering {
    // best first
    b.score
        .total_cmp(&a.score)
        .then(a.distance.total_cmp(&b.distance))
        .then(a.scan.sensing_time.total_cmp(&b.scan.sensing_time))
        .then(a.pose.cell.cmp(&b.pose.cell))
        .then(a.pose.theta.total_cmp(&b.pose.theta))
}

/// Fills in utilities and Choquet scores over the whole candidate list.
pub fn score_candidates(candidates: &mut [Candidate], measure: &FuzzyMeasure<f64>) {
    let raw: Vec<_> = candidates.iter().map(Candidate::raw).collect();
    for (c, u) in candidates.iter_mut().zip(normalize_utilities(&raw)) {
        c.score = choquet(&u, measure);
        c.utilities = u;
    }
}

/// Scores the candidates and returns the best one. Ties go to the smaller
/// distance, then the shorter scan, then the row-major first cell, then the
/// smaller heading.
pub fn select_best(
    mut candidates: Vec<Candidate>,
    measure: &FuzzyMeasure<f64>,
) -> Result<Candidate, EngineError> {
    score_candidates(&mut candidates, measure);
    candidates
        .into_iter()
        .min_by(compare_candidates)
        .ok_or(EngineError::NoCandidates)
}

fn candidate_positions(map: &GridMap, robot: Cell, connectivity: Connectivity, bootstrap: bool) -> Vec<Cell> {
    let mut positions = frontier_cells(map, connectivity);
    if bootstrap && !positions.contains(&robot) {
        positions.push(robot);
        positions.sort();
    }
    positions
}

fn evaluate_positions(
    map: &GridMap,
    positions: &[Cell],
    field: &DistanceField<f64>,
    config: &EngineConfig,
    cache: &VisibilityCache,
) -> Vec<Candidate> {
    let unscanned: Vec<Cell> = map.unscanned_cells().collect();
    let headings: Vec<f64> = config.orientations.headings().collect();
    let per_position: Vec<Vec<Candidate>> = positions
        .par_iter()
        .filter(|&&p| field.is_reachable(p))
        .map(|&p| {
            let distance = field.get(p);
            cache
                .scan_summaries(map, p, &config.orientations, &config.sensor, &unscanned)
                .into_iter()
                .zip(&headings)
                .filter(|(scan, _)| scan.info_gain > 0)
                .map(|(scan, &theta)| Candidate {
                    pose: Pose::new(p, theta),
                    distance,
                    scan,
                    utilities: UtilityVector([0.0; 3]),
                    score: 0.0,
                })
                .collect()
        })
        .collect();
    per_position.into_iter().flatten().collect()
}

/// Candidate poses from `robot` with at least one new cell in view. Before
/// anything has been scanned (`bootstrap`), the robot's own cell is a
/// candidate position as well.
pub fn enumerate_candidates(
    map: &GridMap,
    robot: Pose,
    config: &EngineConfig,
    bootstrap: bool,
) -> Vec<Candidate> {
    let cache = VisibilityCache::new(map, &config.sensor);
    let field = shortest_distances(map, robot.cell, config.connectivity);
    let positions = candidate_positions(map, robot.cell, config.connectivity, bootstrap);
    evaluate_positions(map, &positions, &field, config, &cache)
}

/// Stateful coverage run over one map.
pub struct Engine {
    map: GridMap,
    config: EngineConfig,
    robot: Pose,
    cache: VisibilityCache,
    steps: Vec<StepRecord>,
    travel_total: f64,
    sensing_total: f64,
}

impl Engine {
    pub fn new(map: GridMap, config: EngineConfig) -> Result<Self, EngineError> {
        config.validate()?;
        let cache = VisibilityCache::new(&map, &config.sensor);
        let robot = Pose::new(map.start(), config.orientations.heading(0));
        Ok(Self {
            map,
            config,
            robot,
            cache,
            steps: Vec::new(),
            travel_total: 0.0,
            sensing_total: 0.0,
        })
    }

    pub fn map(&self) -> &GridMap {
        &self.map
    }

    pub fn robot(&self) -> Pose {
        self.robot
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn steps(&self) -> &[StepRecord] {
        &self.steps
    }

    /// Current candidates, unscored.
    pub fn candidates(&self) -> Vec<Candidate> {
        let field = shortest_distances(&self.map, self.robot.cell, self.config.connectivity);
        self.candidates_with(&field)
    }

    fn candidates_with(&self, field: &DistanceField<f64>) -> Vec<Candidate> {
        let positions = candidate_positions(
            &self.map,
            self.robot.cell,
            self.config.connectivity,
            self.steps.is_empty(),
        );
        evaluate_positions(&self.map, &positions, field, &self.config, &self.cache)
    }

    /// Selects, travels to and executes the next sensing operation.
    pub fn step(&mut self) -> Result<StepOutcome, EngineError> {
        let clock = Instant::now();
        let field = shortest_distances(&self.map, self.robot.cell, self.config.connectivity);
        let candidates = self.candidates_with(&field);
        let evaluated = candidates.len();
        if candidates.is_empty() {
            return Ok(StepOutcome::Done);
        }
        let best = select_best(candidates, &self.config.measure)?;
        let decision_time = clock.elapsed().as_secs_f64();

        let path: Path<f64> = astar(
            &self.map,
            self.robot.cell,
            best.pose.cell,
            self.config.connectivity,
        )
        .ok_or_else(|| EngineError::Internal(format!("{} is unreachable", best.pose.cell)))?;
        if Some(path.cost) != field.cost(best.pose.cell) {
            return Err(EngineError::Internal(format!(
                "path to {} disagrees with the distance field",
                best.pose.cell
            )));
        }

        let scan = compute_fos(&self.map, best.pose, &self.config.sensor);
        if scan.summary() != best.scan {
            return Err(EngineError::Internal(format!(
                "scan at {} differs from its evaluation",
                best.pose.cell
            )));
        }
        let newly = mark_scanned(&mut self.map, &scan.smellable_new)?;
        debug_assert_eq!(newly, scan.info_gain);

        let travel = travel_time(path.length, self.config.speed);
        self.travel_total += travel;
        self.sensing_total += scan.sensing_time;
        self.robot = best.pose;
        let record = StepRecord {
            index: self.steps.len() + 1,
            pose: best.pose,
            phi_used: scan.phi_used,
            info_gain: scan.info_gain,
            travel_distance: path.length,
            travel_time: travel,
            sensing_time: scan.sensing_time,
            cumulative_coverage: coverage_ratio(&self.map),
            candidates_evaluated: evaluated,
            decision_time,
        };
        self.steps.push(record.clone());
        Ok(StepOutcome::Step(record))
    }

    fn target_reached(&self) -> bool {
        coverage_ratio(&self.map) >= self.config.target_coverage
    }

    /// Steps until done or the coverage target is met.
    pub fn run(mut self) -> Result<RunResult, EngineError> {
        while !self.target_reached() {
            if self.step()? == StepOutcome::Done {
                break;
            }
        }
        Ok(self.finish())
    }

    pub fn finish(self) -> RunResult {
        let uncovered_cells: Vec<Cell> = self.map.unscanned_cells().collect();
        RunResult {
            total_sensing_ops: self.steps.len(),
            total_travel_time: self.travel_total,
            total_sensing_time: self.sensing_total,
            total_time: self.travel_total + self.sensing_total,
            coverage_satisfied: uncovered_cells.is_empty(),
            final_coverage: coverage_ratio(&self.map),
            uncovered_cells,
            steps: self.steps,
        }
    }
}

/// Runs the full loop on `map` and returns the metrics.
pub fn run_coverage(map: GridMap, config: EngineConfig) -> Result<RunResult, EngineError> {
    Engine::new(map, config)?.run()
}
