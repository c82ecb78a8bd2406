//! Next-Best-Smell: greedy online coverage planning for a mobile robot
//! carrying a remote gas sensor on a pan-tilt unit.
//!
//! The decision math in [`mcdm`] and the path costs in [`planner`] are
//! generic over the scalar type; the aliases below fix it to `f64` for the
//! simulator.

pub mod engine;
pub mod grid_map;
pub mod mcdm;
pub mod planner;
pub mod scalar;
pub mod sensing;

pub use engine::{
    enumerate_candidates, run_coverage, score_candidates, select_best, Candidate, Engine,
    EngineConfig, EngineError, RunResult, StepOutcome, StepRecord,
};
pub use grid_map::{
    coverage_ratio, frontier_cells, generate_random_grid, mark_scanned, parse_map,
    serialize_map, Cell, CellState, Connectivity, GridMap, MapError, OrientationSet, Pose,
};
pub use mcdm::{
    build_measure, choquet, normalize_utilities, validate_measure, ConfigLabel, CriterionId,
    CriterionSet, McdmError, MeasureViolation, NamedConfig,
};
pub use scalar::{Real, Scalar};
pub use sensing::{
    compute_fos, line_of_sight, sensing_time, ScanResult, ScanSummary, SensingError,
    SensorModel,
};

/// Fuzzy measure over `f64`.
pub type Measure = mcdm::FuzzyMeasure<f64>;
/// Weight configuration over `f64`.
pub type Weights = mcdm::WeightConfig<f64>;
/// Utility vector over `f64`.
pub type Utilities = mcdm::UtilityVector<f64>;
/// Raw criterion values over `f64`.
pub type Criteria = mcdm::RawCriteria<f64>;
/// Distance field in meters as `f64`.
pub type Distances = planner::DistanceField<f64>;
/// Grid path with `f64` length.
pub type GridPath = planner::Path<f64>;
