//! Occupancy grid with per-cell scan bookkeeping.
//!
//! Cells are addressed by column `x` and row `y`, stored row-major with `y`
//! growing downward. Headings are measured counter-clockwise from `+x` as
//! seen on the printed map, so 90° points toward row 0.

use std::f64::consts::TAU;
use std::fmt;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MapError {
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid map: {0}")]
    Invalid(String),
    #[error("cell ({x}, {y}) is an obstacle")]
    ObstacleCell { x: usize, y: usize },
}

/// A grid cell, `x` is the column and `y` the row.
///
/// Ordering is row-major (by `y`, then `x`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Cell {
    pub x: usize,
    pub y: usize,
}

impl Cell {
    pub const fn new(x: usize, y: usize) -> Self {
        Self { x, y }
    }
}

impl Ord for Cell {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.y, self.x).cmp(&(other.y, other.x))
    }
}

impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellState {
    Obstacle,
    FreeUnscanned,
    FreeScanned,
}

impl CellState {
    pub fn is_free(self) -> bool {
        self != CellState::Obstacle
    }
}

/// Neighborhood used for motion and frontier detection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Connectivity {
    Four,
    Eight,
}

const AXIAL: [(isize, isize); 4] = [(1, 0), (0, -1), (-1, 0), (0, 1)];
const ALL_NEIGHBORS: [(isize, isize); 8] = [
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

impl Connectivity {
    pub fn from_count(n: usize) -> Option<Self> {
        match n {
            4 => Some(Connectivity::Four),
            8 => Some(Connectivity::Eight),
            _ => None,
        }
    }

    pub fn count(self) -> usize {
        match self {
            Connectivity::Four => 4,
            Connectivity::Eight => 8,
        }
    }

    pub fn offsets(self) -> &'static [(isize, isize)] {
        match self {
            Connectivity::Four => &AXIAL,
            Connectivity::Eight => &ALL_NEIGHBORS,
        }
    }
}

/// The finite set of headings a robot may take, equally spaced in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrientationSet {
    count: usize,
}

impl OrientationSet {
    pub fn new(count: usize) -> Result<Self, MapError> {
        match count {
            4 | 8 => Ok(Self { count }),
            _ => Err(MapError::Invalid(format!(
                "orientation count must be 4 or 8, got {count}"
            ))),
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Heading of the `i`-th orientation in radians.
    pub fn heading(&self, i: usize) -> f64 {
        TAU * i as f64 / self.count as f64
    }

    pub fn headings(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(|i| self.heading(i))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub cell: Cell,
    /// Radians, counter-clockwise from `+x`.
    pub theta: f64,
}

impl Pose {
    pub fn new(cell: Cell, theta: f64) -> Self {
        Self { cell, theta }
    }

    pub fn theta_degrees(&self) -> f64 {
        self.theta.to_degrees()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridMap {
    width: usize,
    height: usize,
    resolution: f64,
    states: Vec<CellState>,
    start: Cell,
    free: usize,
    scanned: usize,
}

impl GridMap {
    /// Builds a map from a row-major state array.
    pub fn from_states(
        width: usize,
        height: usize,
        resolution: f64,
        states: Vec<CellState>,
        start: Cell,
    ) -> Result<Self, MapError> {
        if width == 0 || height == 0 {
            return Err(MapError::Invalid("map must have at least one cell".into()));
        }
        if states.len() != width * height {
            return Err(MapError::Invalid(format!(
                "expected {} states, got {}",
                width * height,
                states.len()
            )));
        }
        if !(resolution > 0.0 && resolution.is_finite()) {
            return Err(MapError::Invalid(format!(
                "resolution must be positive, got {resolution}"
            )));
        }
        if start.x >= width || start.y >= height {
            return Err(MapError::Invalid(format!("start {start} outside the map")));
        }
        if !states[start.y * width + start.x].is_free() {
            return Err(MapError::ObstacleCell {
                x: start.x,
                y: start.y,
            });
        }
        let free = states.iter().filter(|s| s.is_free()).count();
        let scanned = states
            .iter()
            .filter(|&&s| s == CellState::FreeScanned)
            .count();
        Ok(Self {
            width,
            height,
            resolution,
            states,
            start,
            free,
            scanned,
        })
    }

    /// An obstacle-free map with the start nearest the center.
    pub fn empty(width: usize, height: usize, resolution: f64) -> Result<Self, MapError> {
        let states = vec![CellState::FreeUnscanned; width * height];
        let start = nearest_center_free(width, height, &states)
            .ok_or_else(|| MapError::Invalid("map must have at least one cell".into()))?;
        Self::from_states(width, height, resolution, states, start)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Meters per cell side.
    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn start(&self) -> Cell {
        self.start
    }

    pub fn states(&self) -> &[CellState] {
        &self.states
    }

    #[inline]
    pub fn index(&self, cell: Cell) -> usize {
        cell.y * self.width + cell.x
    }

    #[inline]
    pub fn cell_at(&self, index: usize) -> Cell {
        Cell::new(index % self.width, index / self.width)
    }

    pub fn contains(&self, x: isize, y: isize) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height
    }

    #[inline]
    pub fn state(&self, cell: Cell) -> CellState {
        self.states[self.index(cell)]
    }

    #[inline]
    pub fn is_free(&self, cell: Cell) -> bool {
        self.state(cell).is_free()
    }

    pub fn free_count(&self) -> usize {
        self.free
    }

    pub fn scanned_count(&self) -> usize {
        self.scanned
    }

    pub fn obstacle_count(&self) -> usize {
        self.states.len() - self.free
    }

    /// All cells in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.states.len()).map(|i| self.cell_at(i))
    }

    pub fn free_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        self.cells().filter(|&c| self.is_free(c))
    }

    pub fn unscanned_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        self.cells()
            .filter(|&c| self.state(c) == CellState::FreeUnscanned)
    }

    /// In-bounds neighbors of `cell` under `connectivity`, regardless of state.
    pub fn neighbors(
        &self,
        cell: Cell,
        connectivity: Connectivity,
    ) -> impl Iterator<Item = Cell> + '_ {
        connectivity.offsets().iter().filter_map(move |&(dx, dy)| {
            let (nx, ny) = (cell.x as isize + dx, cell.y as isize + dy);
            self.contains(nx, ny)
                .then(|| Cell::new(nx as usize, ny as usize))
        })
    }

    /// Returns a copy with `cell` turned into an obstacle.
    pub fn with_obstacle(&self, cell: Cell) -> Result<Self, MapError> {
        let mut states = self.states.clone();
        states[self.index(cell)] = CellState::Obstacle;
        Self::from_states(self.width, self.height, self.resolution, states, self.start)
    }
}

/// Parses the ASCII map format: a `resolution <meters>` header followed by
/// equal-length rows over `.` (free), `#` (obstacle) and `S` (start).
pub fn parse_map(text: &str) -> Result<GridMap, MapError> {
    let err = |line: usize, column: usize, message: &str| MapError::Parse {
        line,
        column,
        message: message.to_string(),
    };

    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| err(1, 1, "missing resolution header"))?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some("resolution") {
        return Err(err(1, 1, "missing resolution header"));
    }
    let resolution: f64 = parts
        .next()
        .and_then(|s| s.parse().ok())
        .filter(|r: &f64| *r > 0.0 && r.is_finite())
        .ok_or_else(|| err(1, 12, "invalid resolution"))?;
    if parts.next().is_some() {
        return Err(err(1, 1, "unexpected tokens after resolution"));
    }

    let mut width = None;
    let mut states = Vec::new();
    let mut start = None;
    let mut height = 0;
    let mut trailing_blank = None;
    for (i, row) in lines {
        let line_no = i + 1;
        if row.is_empty() {
            trailing_blank.get_or_insert(line_no);
            continue;
        }
        if let Some(blank) = trailing_blank {
            return Err(err(blank, 1, "blank line inside the grid"));
        }
        let row_width = row.chars().count();
        match width {
            None => width = Some(row_width),
            Some(w) if w != row_width => {
                return Err(err(line_no, w.min(row_width) + 1, "ragged row"));
            }
            _ => {}
        }
        for (col, ch) in row.chars().enumerate() {
            let state = match ch {
                '.' => CellState::FreeUnscanned,
                '#' => CellState::Obstacle,
                'S' => {
                    if start.is_some() {
                        return Err(err(line_no, col + 1, "multiple start cells"));
                    }
                    start = Some(Cell::new(col, height));
                    CellState::FreeUnscanned
                }
                _ => return Err(err(line_no, col + 1, "illegal character")),
            };
            states.push(state);
        }
        height += 1;
    }

    let width = width.ok_or_else(|| err(2, 1, "map has no rows"))?;
    let start = start.ok_or_else(|| err(1, 1, "missing start cell"))?;
    GridMap::from_states(width, height, resolution, states, start)
}

/// Writes `map` in the format read by [`parse_map`]. Scan flags are not kept.
pub fn serialize_map(map: &GridMap) -> String {
    let mut out = String::with_capacity((map.width + 1) * map.height + 24);
    out.push_str(&format!("resolution {:?}\n", map.resolution));
    for y in 0..map.height {
        for x in 0..map.width {
            let cell = Cell::new(x, y);
            out.push(if cell == map.start {
                'S'
            } else if map.is_free(cell) {
                '.'
            } else {
                '#'
            });
        }
        out.push('\n');
    }
    out
}

/// Free cell whose center is closest to the grid center; ties go to the
/// smallest row, then the smallest column.
pub fn nearest_center_free(
    width: usize,
    height: usize,
    states: &[CellState],
) -> Option<Cell> {
    // Doubled coordinates keep the comparison in integers.
    let (w, h) = (width as i64, height as i64);
    (0..states.len())
        .filter(|&i| states[i].is_free())
        .map(|i| Cell::new(i % width, i / width))
        .min_by_key(|c| {
            let dx = 2 * c.x as i64 + 1 - w;
            let dy = 2 * c.y as i64 + 1 - h;
            (dx * dx + dy * dy, c.y, c.x)
        })
}

/// Square grid with `round(obstacle_ratio * size^2)` obstacles drawn
/// uniformly without replacement from a ChaCha8 stream seeded with `seed`.
pub fn generate_random_grid(size: usize, obstacle_ratio: f64, seed: u64) -> Result<GridMap, MapError> {
    if size == 0 {
        return Err(MapError::Invalid("size must be at least 1".into()));
    }
    if !(0.0..1.0).contains(&obstacle_ratio) {
        return Err(MapError::Invalid(format!(
            "obstacle ratio must be in [0, 1), got {obstacle_ratio}"
        )));
    }
    let n = size * size;
    let obstacles = (obstacle_ratio * n as f64).round() as usize;
    if obstacles >= n {
        return Err(MapError::Invalid(
            "every cell would be an obstacle".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut states = vec![CellState::FreeUnscanned; n];
    for i in index::sample(&mut rng, n, obstacles).into_iter() {
        states[i] = CellState::Obstacle;
    }
    let start = nearest_center_free(size, size, &states).expect("at least one free cell");
    GridMap::from_states(size, size, 1.0, states, start)
}

/// Scanned free cells with at least one unscanned free neighbor, row-major.
pub fn frontier_cells(map: &GridMap, connectivity: Connectivity) -> Vec<Cell> {
    map.cells()
        .filter(|&c| {
            map.state(c) == CellState::FreeScanned
                && map
                    .neighbors(c, connectivity)
                    .any(|n| map.state(n) == CellState::FreeUnscanned)
        })
        .collect()
}

/// Marks every listed cell as scanned and returns how many changed state.
/// Fails without touching the map if any listed cell is an obstacle.
pub fn mark_scanned<'a, I>(map: &mut GridMap, cells: I) -> Result<usize, MapError>
where
    I: IntoIterator<Item = &'a Cell>,
    I::IntoIter: Clone,
{
    let cells = cells.into_iter();
    if let Some(c) = cells.clone().find(|&&c| !map.is_free(c)) {
        return Err(MapError::ObstacleCell { x: c.x, y: c.y });
    }
    let mut changed = 0;
    for &c in cells {
        let i = map.index(c);
        if map.states[i] == CellState::FreeUnscanned {
            map.states[i] = CellState::FreeScanned;
            changed += 1;
        }
    }
    map.scanned += changed;
    Ok(changed)
}

/// Fraction of free cells already scanned.
pub fn coverage_ratio(map: &GridMap) -> f64 {
    if map.free == 0 {
        return 0.0;
    }
    map.scanned as f64 / map.free as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strip(states: &[CellState]) -> GridMap {
        GridMap::from_states(states.len(), 1, 1.0, states.to_vec(), Cell::new(0, 0)).unwrap()
    }

    #[test]
    fn parses_small_map() {
        let map = parse_map("resolution 1.0\nS.\n.#").unwrap();
        assert_eq!((map.width(), map.height()), (2, 2));
        assert_eq!(map.free_count(), 3);
        assert_eq!(map.start(), Cell::new(0, 0));
        assert_eq!(map.state(Cell::new(1, 1)), CellState::Obstacle);
        assert_eq!(map.resolution(), 1.0);
    }

    #[test]
    fn parses_single_cell() {
        let map = parse_map("resolution 0.5\nS").unwrap();
        assert_eq!((map.width(), map.height()), (1, 1));
        assert_eq!(map.resolution(), 0.5);
        assert_eq!(map.start(), Cell::new(0, 0));
    }

    #[test]
    fn parse_errors_name_position() {
        match parse_map("resolution 1\nS.\n.S") {
            Err(MapError::Parse { line, column, message }) => {
                assert_eq!((line, column), (3, 2));
                assert_eq!(message, "multiple start cells");
            }
            other => panic!("unexpected {other:?}"),
        }
        let msg = |t: &str| match parse_map(t) {
            Err(MapError::Parse { message, .. }) => message,
            other => panic!("unexpected {other:?}"),
        };
        assert_eq!(msg("resolution 1\n..\n.."), "missing start cell");
        assert_eq!(msg("resolution 1\nS..\n.."), "ragged row");
        assert_eq!(msg("resolution 1\nSx"), "illegal character");
        assert_eq!(msg("S.\n.."), "missing resolution header");
        assert_eq!(msg("resolution -2\nS"), "invalid resolution");
        assert_eq!(msg("resolution abc\nS"), "invalid resolution");
        assert_eq!(msg("resolution 1\n"), "map has no rows");
    }

    #[test]
    fn serialize_round_trips() {
        let text = "resolution 0.5\n#..#\n.S..\n..##\n";
        let map = parse_map(text).unwrap();
        assert_eq!(serialize_map(&map), text);
        assert_eq!(parse_map(&serialize_map(&map)).unwrap(), map);
    }

    #[test]
    fn random_grid_obstacle_count() {
        let g = generate_random_grid(3, 0.0, 7).unwrap();
        assert_eq!(g.free_count(), 9);
        assert_eq!(g.start(), Cell::new(1, 1));
        let g = generate_random_grid(90, 0.1, 42).unwrap();
        assert_eq!(g.obstacle_count(), 810);
        assert_eq!(g.resolution(), 1.0);
        assert!(g.is_free(g.start()));
    }

    #[test]
    fn random_grid_is_deterministic() {
        let a = generate_random_grid(25, 0.1, 99).unwrap();
        let b = generate_random_grid(25, 0.1, 99).unwrap();
        assert_eq!(a, b);
        let c = generate_random_grid(25, 0.1, 100).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn random_grid_rejects_bad_input() {
        assert!(generate_random_grid(0, 0.1, 1).is_err());
        assert!(generate_random_grid(4, 1.0, 1).is_err());
        assert!(generate_random_grid(4, -0.1, 1).is_err());
        // 0.97 * 4 rounds to 4 obstacles out of 4
        assert!(generate_random_grid(2, 0.97, 1).is_err());
    }

    #[test]
    fn start_ties_prefer_smallest_row_then_column() {
        let map = GridMap::empty(4, 4, 1.0).unwrap();
        assert_eq!(map.start(), Cell::new(1, 1));
        let map = GridMap::empty(5, 5, 1.0).unwrap();
        assert_eq!(map.start(), Cell::new(2, 2));
    }

    #[test]
    fn frontier_cases() {
        use CellState::*;
        let fresh = GridMap::empty(4, 3, 1.0).unwrap();
        assert!(frontier_cells(&fresh, Connectivity::Four).is_empty());

        let s = strip(&[FreeScanned, FreeScanned, FreeUnscanned]);
        assert_eq!(frontier_cells(&s, Connectivity::Four), vec![Cell::new(1, 0)]);

        let done = strip(&[FreeScanned, Obstacle, FreeScanned]);
        assert!(frontier_cells(&done, Connectivity::Eight).is_empty());
    }

    #[test]
    fn frontier_depends_on_connectivity() {
        use CellState::*;
        let states = vec![
            FreeScanned, Obstacle, //
            Obstacle, FreeUnscanned,
        ];
        let map = GridMap::from_states(2, 2, 1.0, states, Cell::new(0, 0)).unwrap();
        assert!(frontier_cells(&map, Connectivity::Four).is_empty());
        assert_eq!(frontier_cells(&map, Connectivity::Eight), vec![Cell::new(0, 0)]);
    }

    #[test]
    fn mark_scanned_counts_transitions() {
        use CellState::*;
        let mut map = strip(&[FreeUnscanned, FreeUnscanned, FreeScanned, Obstacle]);
        assert_eq!(mark_scanned(&mut map, &[]).unwrap(), 0);
        let cells = [Cell::new(0, 0), Cell::new(1, 0), Cell::new(2, 0)];
        assert_eq!(mark_scanned(&mut map, &cells).unwrap(), 2);
        assert_eq!(mark_scanned(&mut map, &cells[..1]).unwrap(), 0);
        assert_eq!(map.scanned_count(), 3);
    }

    #[test]
    fn mark_scanned_rejects_obstacles_atomically() {
        use CellState::*;
        let mut map = strip(&[FreeUnscanned, Obstacle]);
        let before = map.clone();
        let err = mark_scanned(&mut map, &[Cell::new(0, 0), Cell::new(1, 0)]);
        assert_eq!(err, Err(MapError::ObstacleCell { x: 1, y: 0 }));
        assert_eq!(map, before);
    }

    #[test]
    fn coverage_ratio_values() {
        let mut map = GridMap::empty(3, 3, 1.0).unwrap();
        assert_eq!(coverage_ratio(&map), 0.0);
        let all: Vec<_> = map.cells().collect();
        mark_scanned(&mut map, &all).unwrap();
        assert_eq!(coverage_ratio(&map), 1.0);
    }

    #[test]
    fn coverage_ratio_matches_reported_knee() {
        // 4868 of 6113 free cells scanned.
        let n = 6113;
        let mut states = vec![CellState::FreeUnscanned; n];
        for s in states.iter_mut().take(4868) {
            *s = CellState::FreeScanned;
        }
        let map = GridMap::from_states(n, 1, 1.0, states, Cell::new(0, 0)).unwrap();
        let ratio = coverage_ratio(&map);
        assert!((ratio - 0.796336).abs() < 1e-6, "{ratio}");
    }

    #[test]
    fn orientation_sets() {
        let four = OrientationSet::new(4).unwrap();
        let deg: Vec<f64> = four.headings().map(f64::to_degrees).collect();
        for (got, want) in deg.iter().zip([0.0, 90.0, 180.0, 270.0]) {
            assert!((got - want).abs() < 1e-9);
        }
        let eight = OrientationSet::new(8).unwrap();
        let h: Vec<f64> = eight.headings().collect();
        assert!(h.windows(2).all(|w| w[1] > w[0]));
        assert!(h.iter().all(|&t| (0.0..TAU).contains(&t)));
        assert!(OrientationSet::new(6).is_err());
    }
}
