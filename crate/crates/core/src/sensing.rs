//! Field-of-smell computation for a pan-tilt remote gas sensor.
//!
//! A free cell is smellable from a pose when its center lies inside the
//! sensor sector and the center-to-center segment touches no obstacle cell.
//! Segment traversal is an exact integer supercover: a segment passing
//! through a grid vertex touches all four cells sharing that vertex.
//!
//! Bearings are compared against window edges with a tolerance of
//! [`ANGLE_EPS`] radians so that cells lying exactly on a window edge
//! (e.g. 90° off a heading with a 180° opening) are inside.

use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

use serde::Serialize;
use thiserror::Error;

use crate::grid_map::{Cell, CellState, GridMap, OrientationSet, Pose};

/// Angular tolerance for window membership, in radians.
pub const ANGLE_EPS: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum SensingError {
    #[error("invalid sensor model: {0}")]
    InvalidSensor(String),
    #[error("scan angle {phi}° outside [0, {phi_max}°]")]
    PhiOutOfRange { phi: f64, phi_max: f64 },
}

/// Range, opening angle and timing of the remote gas sensor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SensorModel {
    /// Meters.
    pub r_max: f64,
    /// Degrees.
    pub phi_max: f64,
    /// Seconds spent positioning the pan-tilt unit for every scan.
    pub setup_time: f64,
    /// Seconds per degree of sweep.
    pub sweep_rate: f64,
}

impl Default for SensorModel {
    /// Linear fit through a 45° scan taking 21 s and a 90° scan taking 36 s.
    fn default() -> Self {
        Self {
            r_max: 10.0,
            phi_max: 180.0,
            setup_time: 6.0,
            sweep_rate: 1.0 / 3.0,
        }
    }
}

impl SensorModel {
    pub fn new(
        r_max: f64,
        phi_max: f64,
        setup_time: f64,
        sweep_rate: f64,
    ) -> Result<Self, SensingError> {
        let model = Self {
            r_max,
            phi_max,
            setup_time,
            sweep_rate,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<(), SensingError> {
        let bad = |m: String| Err(SensingError::InvalidSensor(m));
        if !(self.r_max > 0.0 && self.r_max.is_finite()) {
            return bad(format!("r_max must be positive, got {}", self.r_max));
        }
        if !(self.phi_max > 0.0 && self.phi_max <= 180.0) {
            return bad(format!("phi_max must be in (0, 180], got {}", self.phi_max));
        }
        if !(self.setup_time >= 0.0 && self.setup_time.is_finite()) {
            return bad(format!("setup time must be >= 0, got {}", self.setup_time));
        }
        if !(self.sweep_rate > 0.0 && self.sweep_rate.is_finite()) {
            return bad(format!("sweep rate must be positive, got {}", self.sweep_rate));
        }
        Ok(())
    }

    pub fn with_range(mut self, r_max: f64) -> Self {
        self.r_max = r_max;
        self
    }

    pub fn with_phi_max(mut self, phi_max: f64) -> Self {
        self.phi_max = phi_max;
        self
    }

    fn half_window(&self) -> f64 {
        self.phi_max.to_radians() / 2.0
    }

    /// Cost of an executed scan. A scan that only covers the robot's own cell
    /// still pays the setup time.
    fn scan_cost(&self, info_gain: usize, phi_used: f64) -> f64 {
        if info_gain == 0 {
            0.0
        } else {
            self.setup_time + self.sweep_rate * phi_used
        }
    }
}

/// Outcome of one (possible) sensing operation.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    /// Unscanned free cells covered by the sweep, row-major.
    pub smellable_new: Vec<Cell>,
    /// Every free cell covered by the sweep, row-major.
    pub smellable_all: Vec<Cell>,
    /// Degrees actually swept.
    pub phi_used: f64,
    /// Seconds.
    pub sensing_time: f64,
    pub info_gain: usize,
}

impl ScanResult {
    fn nothing() -> Self {
        Self {
            smellable_new: Vec::new(),
            smellable_all: Vec::new(),
            phi_used: 0.0,
            sensing_time: 0.0,
            info_gain: 0,
        }
    }

    pub fn summary(&self) -> ScanSummary {
        ScanSummary {
            info_gain: self.info_gain,
            phi_used: self.phi_used,
            sensing_time: self.sensing_time,
        }
    }
}

/// The scalar part of a [`ScanResult`], without the cell lists.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanSummary {
    pub info_gain: usize,
    pub phi_used: f64,
    pub sensing_time: f64,
}

/// Visits the exact supercover of the segment between the centers of `from`
/// and `to`, stopping early when `visit` returns `false`. Returns `false` iff
/// stopped early.
pub fn walk_supercover(from: Cell, to: Cell, mut visit: impl FnMut(Cell) -> bool) -> bool {
    let (mut x, mut y) = (from.x as isize, from.y as isize);
    let dx = to.x as isize - x;
    let dy = to.y as isize - y;
    let (nx, ny) = (dx.abs(), dy.abs());
    let (sx, sy) = (dx.signum(), dy.signum());
    let cell = |x: isize, y: isize| Cell::new(x as usize, y as usize);

    if !visit(cell(x, y)) {
        return false;
    }
    let (mut ix, mut iy) = (0, 0);
    while ix < nx || iy < ny {
        // Compare the parameters at which the segment crosses the next
        // vertical and horizontal cell boundaries.
        let decision = (1 + 2 * ix) * ny - (1 + 2 * iy) * nx;
        if decision == 0 {
            if !visit(cell(x + sx, y)) || !visit(cell(x, y + sy)) {
                return false;
            }
            x += sx;
            y += sy;
            ix += 1;
            iy += 1;
        } else if decision < 0 {
            x += sx;
            ix += 1;
        } else {
            y += sy;
            iy += 1;
        }
        if !visit(cell(x, y)) {
            return false;
        }
    }
    true
}

/// True iff the segment between the two cell centers touches no obstacle.
pub fn line_of_sight(map: &GridMap, from: Cell, to: Cell) -> bool {
    walk_supercover(from, to, |c| map.is_free(c))
}

/// Bearing of `to` seen from `from`, counter-clockwise from `+x` with rows
/// growing downward.
#[inline]
pub fn bearing(from: Cell, to: Cell) -> f64 {
    let dx = to.x as f64 - from.x as f64;
    let dy = from.y as f64 - to.y as f64;
    dy.atan2(dx)
}

/// Angle `a - b` wrapped into `[-π, π)`.
#[inline]
pub fn relative_angle(a: f64, b: f64) -> f64 {
    (a - b + PI).rem_euclid(TAU) - PI
}

/// Whether the center of a cell offset by `(dx, dy)` cells lies within range.
#[inline]
pub fn within_range(dx: isize, dy: isize, resolution: f64, r_max: f64) -> bool {
    let d2 = (dx * dx + dy * dy) as f64 * resolution * resolution;
    d2 <= r_max * r_max
}

/// Largest per-axis cell offset that can still be within range.
pub fn range_in_cells(resolution: f64, r_max: f64) -> usize {
    let mut r = (r_max / resolution).floor() as usize;
    while within_range(r as isize + 1, 0, resolution, r_max) {
        r += 1;
    }
    r
}

fn range_box(map: &GridMap, center: Cell, radius: usize) -> (usize, usize, usize, usize) {
    (
        center.x.saturating_sub(radius),
        (center.x + radius).min(map.width() - 1),
        center.y.saturating_sub(radius),
        (center.y + radius).min(map.height() - 1),
    )
}

/// Field of smell of a sensing operation at `pose`, with the sweep trimmed
/// to the extreme bearings of the unscanned smellable cells.
pub fn compute_fos(map: &GridMap, pose: Pose, sensor: &SensorModel) -> ScanResult {
    let origin = pose.cell;
    let half = sensor.half_window();
    let radius = range_in_cells(map.resolution(), sensor.r_max);
    let (x0, x1, y0, y1) = range_box(map, origin, radius);

    // (cell, relative bearing, unscanned) for every smellable cell other
    // than the origin.
    let mut visible = Vec::new();
    for y in y0..=y1 {
        for x in x0..=x1 {
            let cell = Cell::new(x, y);
            if cell == origin || !map.is_free(cell) {
                continue;
            }
            let (dx, dy) = (x as isize - origin.x as isize, y as isize - origin.y as isize);
            if !within_range(dx, dy, map.resolution(), sensor.r_max) {
                continue;
            }
            let rel = relative_angle(bearing(origin, cell), pose.theta);
            if rel.abs() > half + ANGLE_EPS || !line_of_sight(map, origin, cell) {
                continue;
            }
            visible.push((cell, rel, map.state(cell) == CellState::FreeUnscanned));
        }
    }

    let own_new = map.state(origin) == CellState::FreeUnscanned;
    let mut sweep: Option<(f64, f64)> = None;
    for &(_, rel, new) in &visible {
        if new {
            sweep = Some(match sweep {
                None => (rel, rel),
                Some((lo, hi)) => (lo.min(rel), hi.max(rel)),
            });
        }
    }
    if sweep.is_none() && !own_new {
        return ScanResult::nothing();
    }

    let mut smellable_all = vec![origin];
    if let Some((lo, hi)) = sweep {
        smellable_all.extend(
            visible
                .iter()
                .filter(|&&(_, rel, _)| rel >= lo - ANGLE_EPS && rel <= hi + ANGLE_EPS)
                .map(|&(c, _, _)| c),
        );
    }
    smellable_all.sort();
    let smellable_new: Vec<Cell> = smellable_all
        .iter()
        .copied()
        .filter(|&c| map.state(c) == CellState::FreeUnscanned)
        .collect();
    let phi_used = sweep
        .map(|(lo, hi)| (hi - lo).to_degrees().clamp(0.0, sensor.phi_max))
        .unwrap_or(0.0);
    let info_gain = smellable_new.len();
    ScanResult {
        smellable_new,
        smellable_all,
        phi_used,
        sensing_time: sensor.scan_cost(info_gain, phi_used),
        info_gain,
    }
}

/// Setup plus sweep time for a sweep of `phi` degrees; zero for no sweep.
pub fn sensing_time(phi: f64, sensor: &SensorModel) -> Result<f64, SensingError> {
    if !(0.0..=sensor.phi_max).contains(&phi) {
        return Err(SensingError::PhiOutOfRange {
            phi,
            phi_max: sensor.phi_max,
        });
    }
    if phi == 0.0 {
        return Ok(0.0);
    }
    Ok(sensor.setup_time + sensor.sweep_rate * phi)
}

/// Lazily computed, obstacle-only visibility within sensor range.
///
/// For each source cell the cache stores one bit per cell of the square
/// window of half-side `radius` around it. Scan state never affects line of
/// sight, so entries stay valid for the lifetime of the map's obstacle layout.
pub struct VisibilityCache {
    width: usize,
    height: usize,
    resolution: f64,
    r_max: f64,
    radius: usize,
    side: usize,
    entries: Vec<OnceLock<Box<[u64]>>>,
}

impl VisibilityCache {
    pub fn new(map: &GridMap, sensor: &SensorModel) -> Self {
        let radius = range_in_cells(map.resolution(), sensor.r_max);
        let n = map.width() * map.height();
        Self {
            width: map.width(),
            height: map.height(),
            resolution: map.resolution(),
            r_max: sensor.r_max,
            radius,
            side: 2 * radius + 1,
            entries: (0..n).map(|_| OnceLock::new()).collect(),
        }
    }

    fn bit(&self, source: Cell, target: Cell) -> usize {
        let bx = target.x + self.radius - source.x;
        let by = target.y + self.radius - source.y;
        by * self.side + bx
    }

    fn build(&self, map: &GridMap, source: Cell) -> Box<[u64]> {
        let mut bits = vec![0u64; (self.side * self.side).div_ceil(64)];
        let (x0, x1, y0, y1) = range_box(map, source, self.radius);
        for y in y0..=y1 {
            for x in x0..=x1 {
                let target = Cell::new(x, y);
                let (dx, dy) = (x as isize - source.x as isize, y as isize - source.y as isize);
                if map.is_free(target)
                    && within_range(dx, dy, self.resolution, self.r_max)
                    && line_of_sight(map, source, target)
                {
                    let b = self.bit(source, target);
                    bits[b / 64] |= 1 << (b % 64);
                }
            }
        }
        bits.into_boxed_slice()
    }

    /// Whether `target` is free, within range of and visible from `source`.
    pub fn visible(&self, map: &GridMap, source: Cell, target: Cell) -> bool {
        debug_assert_eq!((map.width(), map.height()), (self.width, self.height));
        if source.x.abs_diff(target.x) > self.radius || source.y.abs_diff(target.y) > self.radius {
            return false;
        }
        let bits = self.entries[map.index(source)].get_or_init(|| self.build(map, source));
        let b = self.bit(source, target);
        bits[b / 64] >> (b % 64) & 1 == 1
    }

    /// Scan summaries at `position` for every heading in `orientations`,
    /// identical to `compute_fos(..).summary()` for the same poses.
    ///
    /// `unscanned` must list the map's unscanned free cells; it is used
    /// instead of the range window when it is the shorter of the two.
    pub fn scan_summaries(
        &self,
        map: &GridMap,
        position: Cell,
        orientations: &OrientationSet,
        sensor: &SensorModel,
        unscanned: &[Cell],
    ) -> Vec<ScanSummary> {
        let mut bearings = Vec::new();
        let mut consider = |target: Cell| {
            if target != position
                && map.state(target) == CellState::FreeUnscanned
                && self.visible(map, position, target)
            {
                bearings.push(bearing(position, target));
            }
        };
        let (x0, x1, y0, y1) = range_box(map, position, self.radius);
        if unscanned.len() < (x1 - x0 + 1) * (y1 - y0 + 1) {
            unscanned.iter().copied().for_each(&mut consider);
        } else {
            for y in y0..=y1 {
                for x in x0..=x1 {
                    consider(Cell::new(x, y));
                }
            }
        }

        let own_new = usize::from(map.state(position) == CellState::FreeUnscanned);
        let half = sensor.half_window();
        orientations
            .headings()
            .map(|theta| {
                let mut count = 0;
                let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
                for &b in &bearings {
                    let rel = relative_angle(b, theta);
                    if rel.abs() <= half + ANGLE_EPS {
                        count += 1;
                        lo = lo.min(rel);
                        hi = hi.max(rel);
                    }
                }
                let info_gain = count + own_new;
                let phi_used = if count > 0 {
                    (hi - lo).to_degrees().clamp(0.0, sensor.phi_max)
                } else {
                    0.0
                };
                ScanSummary {
                    info_gain,
                    phi_used,
                    sensing_time: sensor.scan_cost(info_gain, phi_used),
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_map::{mark_scanned, parse_map};

    fn wide_sensor() -> SensorModel {
        SensorModel::default().with_range(100.0)
    }

    #[test]
    fn default_calibration() {
        let s = SensorModel::default();
        assert_eq!(sensing_time(0.0, &s).unwrap(), 0.0);
        assert_eq!(sensing_time(45.0, &s).unwrap(), 21.0);
        assert_eq!(sensing_time(90.0, &s).unwrap(), 36.0);
        assert!(sensing_time(181.0, &s).is_err());
        assert!(sensing_time(-1.0, &s).is_err());
    }

    #[test]
    fn sensor_validation() {
        assert!(SensorModel::new(0.0, 180.0, 6.0, 0.3).is_err());
        assert!(SensorModel::new(10.0, 0.0, 6.0, 0.3).is_err());
        assert!(SensorModel::new(10.0, 190.0, 6.0, 0.3).is_err());
        assert!(SensorModel::new(10.0, 90.0, -1.0, 0.3).is_err());
        assert!(SensorModel::new(10.0, 90.0, 6.0, 0.0).is_err());
        assert!(SensorModel::new(10.0, 90.0, 0.0, 0.3).is_ok());
    }

    #[test]
    fn line_of_sight_basics() {
        let map = parse_map("resolution 1\nS#.").unwrap();
        let (a, c) = (Cell::new(0, 0), Cell::new(2, 0));
        assert!(line_of_sight(&map, a, a));
        assert!(!line_of_sight(&map, a, c));
        assert!(!line_of_sight(&map, c, a));
    }

    #[test]
    fn corner_touch_blocks() {
        // The diagonal passes exactly through the vertex shared with (1, 0).
        let map = parse_map("resolution 1\nS#\n..").unwrap();
        assert!(!line_of_sight(&map, Cell::new(0, 0), Cell::new(1, 1)));
        let open = parse_map("resolution 1\nS.\n..").unwrap();
        assert!(line_of_sight(&open, Cell::new(0, 0), Cell::new(1, 1)));
    }

    #[test]
    fn supercover_of_shallow_segment() {
        let walk = |to| {
            let mut cells = Vec::new();
            walk_supercover(Cell::new(0, 0), to, |c| {
                cells.push((c.x, c.y));
                true
            });
            cells
        };
        assert_eq!(
            walk(Cell::new(4, 1)),
            [(0, 0), (1, 0), (2, 0), (2, 1), (3, 1), (4, 1)]
        );
        // Crosses the vertex between rows 0/1 and columns 1/2 exactly.
        assert_eq!(
            walk(Cell::new(3, 1)),
            [(0, 0), (1, 0), (2, 0), (1, 1), (2, 1), (3, 1)]
        );
    }

    #[test]
    fn single_cell_map() {
        let map = parse_map("resolution 1\nS").unwrap();
        let s = SensorModel::default();
        let scan = compute_fos(&map, Pose::new(Cell::new(0, 0), 0.0), &s);
        assert_eq!(scan.smellable_all, vec![Cell::new(0, 0)]);
        assert_eq!(scan.smellable_new, vec![Cell::new(0, 0)]);
        assert_eq!(scan.info_gain, 1);
        assert_eq!(scan.phi_used, 0.0);
        // Own cell only: a zero-angle scan still pays the setup time.
        assert_eq!(scan.sensing_time, s.setup_time);

        let mut map = map;
        mark_scanned(&mut map, &[Cell::new(0, 0)]).unwrap();
        let again = compute_fos(&map, Pose::new(Cell::new(0, 0), 0.0), &s);
        assert_eq!(again.info_gain, 0);
        assert!(again.smellable_all.is_empty());
        assert_eq!(again.sensing_time, 0.0);
    }

    #[test]
    fn sweep_is_trimmed_to_unscanned_cells() {
        // Robot in the middle of an open 5x5 map looking east; everything
        // except the cell straight ahead is already scanned.
        let mut map = parse_map("resolution 1\n.....\n.....\n..S..\n.....\n.....").unwrap();
        let all: Vec<Cell> = map.cells().filter(|&c| c != Cell::new(4, 2)).collect();
        mark_scanned(&mut map, &all).unwrap();
        let scan = compute_fos(&map, Pose::new(Cell::new(2, 2), 0.0), &wide_sensor());
        assert_eq!(scan.info_gain, 1);
        assert_eq!(scan.smellable_new, vec![Cell::new(4, 2)]);
        assert_eq!(scan.phi_used, 0.0);
        // Cells on the same bearing are covered, the rest of the window is not.
        assert_eq!(
            scan.smellable_all,
            vec![Cell::new(2, 2), Cell::new(3, 2), Cell::new(4, 2)]
        );
    }

    #[test]
    fn window_edges_are_inclusive() {
        let map = parse_map("resolution 1\n...\n.S.\n...").unwrap();
        let scan = compute_fos(&map, Pose::new(Cell::new(1, 1), 0.0), &wide_sensor());
        // 180° facing east: the whole eastern half plus north and south.
        assert_eq!(scan.info_gain, 6);
        assert!((scan.phi_used - 180.0).abs() < 1e-9);
        let narrow = wide_sensor().with_phi_max(90.0);
        let scan = compute_fos(&map, Pose::new(Cell::new(1, 1), 0.0), &narrow);
        // East plus the two eastern diagonals at ±45°.
        assert_eq!(scan.info_gain, 4);
        assert!((scan.phi_used - 90.0).abs() < 1e-9);
    }

    #[test]
    fn range_limit_uses_resolution() {
        let map = parse_map("resolution 0.5\nS....").unwrap();
        let s = SensorModel::default().with_range(1.0);
        let scan = compute_fos(&map, Pose::new(Cell::new(0, 0), 0.0), &s);
        // 1 m reaches two cells of 0.5 m.
        assert_eq!(scan.info_gain, 3);
        assert_eq!(range_in_cells(0.5, 1.0), 2);
        assert_eq!(range_in_cells(1.0, 2.5), 2);
    }

    #[test]
    fn heading_convention_is_counter_clockwise_with_rows_down() {
        let a = Cell::new(1, 1);
        assert!((bearing(a, Cell::new(1, 0)) - PI / 2.0).abs() < 1e-12);
        assert!((bearing(a, Cell::new(0, 1)) - PI).abs() < 1e-12);
        assert!((relative_angle(0.0, 1.5 * PI) - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn cache_agrees_with_compute_fos() {
        let text = "resolution 1\n..#....\n.#...#.\n...S...\n.##..#.\n.......";
        let mut map = parse_map(text).unwrap();
        let sensor = SensorModel::default().with_range(3.0).with_phi_max(120.0);
        let orientations = OrientationSet::new(8).unwrap();
        let some: Vec<Cell> = map.free_cells().step_by(3).collect();
        mark_scanned(&mut map, &some).unwrap();
        let unscanned: Vec<Cell> = map.unscanned_cells().collect();
        let cache = VisibilityCache::new(&map, &sensor);
        for cell in map.free_cells() {
            let fast = cache.scan_summaries(&map, cell, &orientations, &sensor, &unscanned);
            for (i, theta) in orientations.headings().enumerate() {
                let slow = compute_fos(&map, Pose::new(cell, theta), &sensor);
                assert_eq!(fast[i], slow.summary(), "{cell} heading {i}");
            }
        }
    }
}
