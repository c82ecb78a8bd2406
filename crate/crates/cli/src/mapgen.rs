//! Synthetic maps: empty squares, office corridors, open room layouts and
//! random obstacle grids.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nbs_core::grid_map::{generate_random_grid, nearest_center_free, CellState, GridMap, MapError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum MapKind {
    Empty,
    Corridor,
    Rooms,
    Random,
}

#[derive(Debug, Clone, Copy)]
pub struct MapSpec {
    pub kind: MapKind,
    pub width: usize,
    pub height: usize,
    pub seed: u64,
    pub obstacle_ratio: f64,
    pub resolution: f64,
}

pub fn generate(spec: &MapSpec) -> Result<GridMap, MapError> {
    match spec.kind {
        MapKind::Empty => GridMap::empty(spec.width, spec.height, spec.resolution),
        MapKind::Random => {
            if spec.width != spec.height {
                return Err(MapError::Invalid("random grids are square".into()));
            }
            let g = generate_random_grid(spec.width, spec.obstacle_ratio, spec.seed)?;
            GridMap::from_states(g.width(), g.height(), spec.resolution, g.states().to_vec(), g.start())
        }
        MapKind::Corridor => corridor(spec.width, spec.height, spec.resolution, spec.seed),
        MapKind::Rooms => rooms(spec.width, spec.height, spec.resolution, spec.seed),
    }
}

struct Canvas {
    width: usize,
    height: usize,
    states: Vec<CellState>,
}

impl Canvas {
    fn walls(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            states: vec![CellState::Obstacle; width * height],
        }
    }

    fn set(&mut self, x: usize, y: usize, state: CellState) {
        self.states[y * self.width + x] = state;
    }

    fn get(&self, x: usize, y: usize) -> CellState {
        self.states[y * self.width + x]
    }

    fn carve(&mut self, x0: usize, x1: usize, y0: usize, y1: usize) {
        for y in y0..=y1 {
            for x in x0..=x1 {
                self.set(x, y, CellState::FreeUnscanned);
            }
        }
    }

    fn finish(self, resolution: f64) -> Result<GridMap, MapError> {
        let start = nearest_center_free(self.width, self.height, &self.states)
            .ok_or_else(|| MapError::Invalid("generated map has no free cell".into()))?;
        GridMap::from_states(self.width, self.height, resolution, self.states, start)
    }
}

/// A two-cell-wide corridor along the middle row with small rooms opening
/// onto it from both sides.
pub fn corridor(width: usize, height: usize, resolution: f64, seed: u64) -> Result<GridMap, MapError> {
    if width < 8 || height < 8 {
        return Err(MapError::Invalid("corridor maps need at least 8x8 cells".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut canvas = Canvas::walls(width, height);
    let mid = height / 2;
    canvas.carve(1, width - 2, mid - 1, mid);

    // Room bands above and below, separated from the corridor by one wall row.
    let bands = [(1, mid - 3, mid - 2), (mid + 2, height - 2, mid + 1)];
    for (y0, y1, door_row) in bands {
        if y1 < y0 {
            continue;
        }
        let mut x = 1;
        while x + 2 < width - 1 {
            let room_width = rng.gen_range(3..=7).min(width - 2 - x);
            if room_width >= 2 && rng.gen_bool(0.75) {
                canvas.carve(x, x + room_width - 1, y0, y1);
                let door = rng.gen_range(x..x + room_width);
                canvas.set(door, door_row, CellState::FreeUnscanned);
            }
            x += room_width + 1;
        }
    }
    canvas.finish(resolution)
}

/// Large rooms in a jittered grid, each wall between neighbors pierced by a
/// doorway, some walls removed entirely, and scattered free-standing pillars.
pub fn rooms(width: usize, height: usize, resolution: f64, seed: u64) -> Result<GridMap, MapError> {
    if width < 10 || height < 10 {
        return Err(MapError::Invalid("room maps need at least 10x10 cells".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut canvas = Canvas::walls(width, height);
    canvas.carve(1, width - 2, 1, height - 2);

    let splits = |rng: &mut ChaCha8Rng, extent: usize| -> Vec<usize> {
        let rooms = (extent / 20).max(1);
        let pitch = extent as f64 / rooms as f64;
        let jitter = (pitch / 5.0) as i64;
        (1..rooms)
            .map(|k| {
                let base = (pitch * k as f64) as i64;
                (base + rng.gen_range(-jitter..=jitter)) as usize
            })
            .collect()
    };
    let xs = splits(&mut rng, width);
    let ys = splits(&mut rng, height);
    let bounds = |splits: &[usize], extent: usize| -> Vec<(usize, usize)> {
        let mut edges = vec![0];
        edges.extend_from_slice(splits);
        edges.push(extent - 1);
        edges.windows(2).map(|w| (w[0] + 1, w[1] - 1)).collect()
    };
    let col_spans = bounds(&xs, width);
    let row_spans = bounds(&ys, height);

    // Vertical walls, one segment per row of rooms.
    for &x in &xs {
        for &(y0, y1) in &row_spans {
            wall_segment(&mut canvas, &mut rng, y0, y1, |c, t, s| c.set(x, t, s));
        }
    }
    // Horizontal walls, one segment per column of rooms.
    for &y in &ys {
        for &(x0, x1) in &col_spans {
            wall_segment(&mut canvas, &mut rng, x0, x1, |c, t, s| c.set(t, y, s));
        }
    }

    let pillars = width * height / 200;
    for _ in 0..pillars {
        let x = rng.gen_range(3..width - 3);
        let y = rng.gen_range(3..height - 3);
        let clear = (y - 2..=y + 2).all(|yy| (x - 2..=x + 2).all(|xx| canvas.get(xx, yy).is_free()));
        if clear {
            canvas.set(x, y, CellState::Obstacle);
        }
    }
    canvas.finish(resolution)
}

/// Draws a wall from `lo` to `hi` with a doorway, or leaves it out entirely.
fn wall_segment(
    canvas: &mut Canvas,
    rng: &mut ChaCha8Rng,
    lo: usize,
    hi: usize,
    mut set: impl FnMut(&mut Canvas, usize, CellState),
) {
    // Also close the junction cells at both ends so walls meet.
    let (from, to) = (lo - 1, hi + 1);
    if rng.gen_bool(0.25) {
        return;
    }
    for t in from..=to {
        set(canvas, t, CellState::Obstacle);
    }
    let span = hi - lo + 1;
    let door = rng.gen_range(3..=6).min(span);
    let at = rng.gen_range(lo..=hi + 1 - door);
    for t in at..at + door {
        set(canvas, t, CellState::FreeUnscanned);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nbs_core::planner::shortest_distances;
    use nbs_core::{Connectivity, Distances};

    fn connected(map: &GridMap) -> bool {
        let field: Distances = shortest_distances(map, map.start(), Connectivity::Four);
        map.free_cells().all(|c| field.is_reachable(c))
    }

    fn spec(kind: MapKind, width: usize, height: usize, seed: u64) -> MapSpec {
        MapSpec {
            kind,
            width,
            height,
            seed,
            obstacle_ratio: 0.1,
            resolution: 1.0,
        }
    }

    #[test]
    fn empty_map_has_center_start() {
        let map = generate(&spec(MapKind::Empty, 5, 5, 0)).unwrap();
        assert_eq!(map.free_count(), 25);
        assert_eq!(map.start(), nbs_core::Cell::new(2, 2));
    }

    #[test]
    fn corridor_and_rooms_are_connected_and_deterministic() {
        for seed in 0..20 {
            let c = generate(&spec(MapKind::Corridor, 60, 10, seed)).unwrap();
            assert!(connected(&c), "corridor seed {seed}");
            assert_eq!(c, generate(&spec(MapKind::Corridor, 60, 10, seed)).unwrap());
            let r = generate(&spec(MapKind::Rooms, 80, 80, seed)).unwrap();
            assert!(connected(&r), "rooms seed {seed}");
            assert_eq!(r, generate(&spec(MapKind::Rooms, 80, 80, seed)).unwrap());
        }
    }

    #[test]
    fn corridor_is_mostly_thin() {
        let c = generate(&spec(MapKind::Corridor, 60, 10, 1)).unwrap();
        assert!(c.free_count() > 116 && c.free_count() < 400, "{}", c.free_count());
    }

    #[test]
    fn random_kind_honors_ratio() {
        let r = generate(&spec(MapKind::Random, 90, 90, 5)).unwrap();
        assert_eq!(r.obstacle_count(), 810);
    }

    #[test]
    fn small_sizes_are_rejected() {
        assert!(generate(&spec(MapKind::Corridor, 5, 5, 0)).is_err());
        assert!(generate(&spec(MapKind::Rooms, 9, 30, 0)).is_err());
    }
}
