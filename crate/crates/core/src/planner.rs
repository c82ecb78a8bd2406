//! Shortest paths on the occupancy grid.
//!
//! Path costs are carried exactly as a count of axial and diagonal moves, so
//! Dijkstra and A* agree bit-for-bit once converted to meters. A diagonal
//! move is refused when both cells flanking it are obstacles.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::ops::Add;

use crate::grid_map::{Cell, Connectivity, GridMap};
use crate::scalar::Real;

/// Cost `axial + diagonal·√2` in cell sides, compared exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct PathCost {
    pub axial: u32,
    pub diagonal: u32,
}

impl PathCost {
    pub const ZERO: PathCost = PathCost {
        axial: 0,
        diagonal: 0,
    };
    const AXIAL_STEP: PathCost = PathCost {
        axial: 1,
        diagonal: 0,
    };
    const DIAGONAL_STEP: PathCost = PathCost {
        axial: 0,
        diagonal: 1,
    };

    pub fn new(axial: u32, diagonal: u32) -> Self {
        Self { axial, diagonal }
    }

    /// Length in meters for cells of side `resolution`.
    pub fn length<T: Real>(self, resolution: T) -> T {
        let axial = T::from_u32(self.axial).unwrap();
        let diagonal = T::from_u32(self.diagonal).unwrap();
        resolution * (axial + diagonal * T::SQRT_2())
    }
}

impl Add for PathCost {
    type Output = PathCost;

    fn add(self, rhs: Self) -> Self {
        PathCost::new(self.axial + rhs.axial, self.diagonal + rhs.diagonal)
    }
}

impl Ord for PathCost {
    fn cmp(&self, other: &Self) -> Ordering {
        // sign of p - q·√2 with p, q integers
        let p = self.axial as i64 - other.axial as i64;
        let q = other.diagonal as i64 - self.diagonal as i64;
        match (p.signum(), q.signum()) {
            (0, 0) => Ordering::Equal,
            (ps, qs) if ps >= 0 && qs <= 0 => Ordering::Greater,
            (ps, qs) if ps <= 0 && qs >= 0 => Ordering::Less,
            (1, 1) => (p * p).cmp(&(2 * q * q)),
            _ => (2 * q * q).cmp(&(p * p)),
        }
    }
}

impl PartialOrd for PathCost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source shortest path costs over free cells.
#[derive(Debug, Clone)]
pub struct DistanceField<T> {
    width: usize,
    resolution: T,
    costs: Vec<Option<PathCost>>,
}

impl<T: Real> DistanceField<T> {
    pub fn cost(&self, cell: Cell) -> Option<PathCost> {
        self.costs[cell.y * self.width + cell.x]
    }

    /// Meters to `cell`, `+∞` when unreachable.
    pub fn get(&self, cell: Cell) -> T {
        self.cost(cell)
            .map_or(T::infinity(), |c| c.length(self.resolution))
    }

    pub fn is_reachable(&self, cell: Cell) -> bool {
        self.cost(cell).is_some()
    }
}

/// Moves out of `cell` as `(neighbor, step cost)`.
fn moves(
    map: &GridMap,
    cell: Cell,
    connectivity: Connectivity,
) -> impl Iterator<Item = (Cell, PathCost)> + '_ {
    connectivity.offsets().iter().filter_map(move |&(dx, dy)| {
        let (nx, ny) = (cell.x as isize + dx, cell.y as isize + dy);
        if !map.contains(nx, ny) {
            return None;
        }
        let next = Cell::new(nx as usize, ny as usize);
        if !map.is_free(next) {
            return None;
        }
        if dx != 0 && dy != 0 {
            let side_a = Cell::new(nx as usize, cell.y);
            let side_b = Cell::new(cell.x, ny as usize);
            if !map.is_free(side_a) && !map.is_free(side_b) {
                return None;
            }
            Some((next, PathCost::DIAGONAL_STEP))
        } else {
            Some((next, PathCost::AXIAL_STEP))
        }
    })
}

/// Dijkstra from `source` over free cells.
pub fn shortest_distances<T: Real>(
    map: &GridMap,
    source: Cell,
    connectivity: Connectivity,
) -> DistanceField<T> {
    debug_assert!(map.is_free(source));
    let mut costs = vec![None; map.width() * map.height()];
    let mut heap = BinaryHeap::new();
    costs[map.index(source)] = Some(PathCost::ZERO);
    heap.push(Reverse((PathCost::ZERO, map.index(source))));
    while let Some(Reverse((cost, i))) = heap.pop() {
        if costs[i].is_some_and(|c| c < cost) {
            continue;
        }
        for (next, step) in moves(map, map.cell_at(i), connectivity) {
            let j = map.index(next);
            let candidate = cost + step;
            if costs[j].is_none_or(|c| candidate < c) {
                costs[j] = Some(candidate);
                heap.push(Reverse((candidate, j)));
            }
        }
    }
    DistanceField {
        width: map.width(),
        resolution: T::from_f64(map.resolution()).unwrap(),
        costs,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Path<T> {
    pub cells: Vec<Cell>,
    pub cost: PathCost,
    /// Meters.
    pub length: T,
}

fn heuristic(from: Cell, to: Cell, connectivity: Connectivity) -> PathCost {
    let dx = from.x.abs_diff(to.x) as u32;
    let dy = from.y.abs_diff(to.y) as u32;
    match connectivity {
        Connectivity::Four => PathCost::new(dx + dy, 0),
        Connectivity::Eight => PathCost::new(dx.max(dy) - dx.min(dy), dx.min(dy)),
    }
}

/// A* with the Manhattan (4-connected) or octile (8-connected) heuristic.
/// Returns `None` when `to` cannot be reached.
pub fn astar<T: Real>(
    map: &GridMap,
    from: Cell,
    to: Cell,
    connectivity: Connectivity,
) -> Option<Path<T>> {
    let n = map.width() * map.height();
    let mut best: Vec<Option<PathCost>> = vec![None; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut open = BinaryHeap::new();
    let (start, goal) = (map.index(from), map.index(to));
    best[start] = Some(PathCost::ZERO);
    open.push(Reverse((heuristic(from, to, connectivity), start)));

    while let Some(Reverse((_, i))) = open.pop() {
        if closed[i] {
            continue;
        }
        closed[i] = true;
        if i == goal {
            break;
        }
        let g = best[i].unwrap();
        for (next, step) in moves(map, map.cell_at(i), connectivity) {
            let j = map.index(next);
            let candidate = g + step;
            if !closed[j] && best[j].is_none_or(|c| candidate < c) {
                best[j] = Some(candidate);
                parent[j] = i;
                open.push(Reverse((candidate + heuristic(next, to, connectivity), j)));
            }
        }
    }

    let cost = best[goal].filter(|_| closed[goal])?;
    let mut cells = vec![to];
    let mut i = goal;
    while i != start {
        i = parent[i];
        cells.push(map.cell_at(i));
    }
    cells.reverse();
    Some(Path {
        cells,
        cost,
        length: cost.length(T::from_f64(map.resolution()).unwrap()),
    })
}

/// Seconds to cover `distance` meters at `speed` meters per second.
pub fn travel_time<T: Real>(distance: T, speed: T) -> T {
    debug_assert!(distance >= T::zero() && distance.is_finite());
    debug_assert!(speed > T::zero());
    distance / speed
}
