use std::collections::BTreeSet;
use std::f64::consts::SQRT_2;

use nbs_core::planner::{astar, shortest_distances, PathCost};
use nbs_core::{
    compute_fos, line_of_sight, Cell, CellState, Connectivity, GridMap, GridPath, Distances,
    Pose, SensorModel,
};
use proptest::prelude::*;

/// Maps up to 8x8 with a free start at (0, 0) and roughly a quarter
/// obstacles.
fn small_map() -> impl Strategy<Value = GridMap> {
    (2usize..=8, 2usize..=8).prop_flat_map(|(w, h)| {
        proptest::collection::vec(proptest::bool::weighted(0.25), w * h).prop_map(move |bits| {
            let mut states: Vec<CellState> = bits
                .into_iter()
                .map(|b| if b { CellState::Obstacle } else { CellState::FreeUnscanned })
                .collect();
            states[0] = CellState::FreeUnscanned;
            GridMap::from_states(w, h, 1.0, states, Cell::new(0, 0)).unwrap()
        })
    })
}

fn free_cells(map: &GridMap) -> Vec<Cell> {
    map.free_cells().collect()
}

fn connectivities() -> impl Strategy<Value = Connectivity> {
    prop_oneof![Just(Connectivity::Four), Just(Connectivity::Eight)]
}

/// All-pairs shortest lengths by Floyd-Warshall with its own move rule: a
/// diagonal step is refused only when both flanking cells are blocked.
fn floyd(map: &GridMap, conn: Connectivity) -> Vec<Vec<f64>> {
    let n = map.width() * map.height();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    let blocked = |x: isize, y: isize| {
        !map.contains(x, y) || !map.is_free(Cell::new(x as usize, y as usize))
    };
    for c in map.free_cells() {
        let i = map.index(c);
        d[i][i] = 0.0;
        let (x, y) = (c.x as isize, c.y as isize);
        for dy in -1isize..=1 {
            for dx in -1isize..=1 {
                let diagonal = dx != 0 && dy != 0;
                if (dx == 0 && dy == 0) || (diagonal && conn == Connectivity::Four) {
                    continue;
                }
                if blocked(x + dx, y + dy) || (diagonal && blocked(x + dx, y) && blocked(x, y + dy)) {
                    continue;
                }
                let j = map.index(Cell::new((x + dx) as usize, (y + dy) as usize));
                d[i][j] = if diagonal { SQRT_2 } else { 1.0 };
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn distances_and_paths_match_floyd(map in small_map(), conn in connectivities()) {
        let oracle = floyd(&map, conn);
        let cells = free_cells(&map);
        for &a in &cells {
            let field: Distances = shortest_distances(&map, a, conn);
            for &b in &cells {
                let expect = oracle[map.index(a)][map.index(b)];
                let got = field.get(b);
                if expect.is_infinite() {
                    prop_assert!(!field.is_reachable(b));
                    prop_assert!(astar::<f64>(&map, a, b, conn).is_none());
                    continue;
                }
                prop_assert!((got - expect).abs() < 1e-9, "{a} -> {b}: {got} vs {expect}");
                let path: GridPath = astar(&map, a, b, conn).unwrap();
                prop_assert_eq!(Some(path.cost), field.cost(b));
                prop_assert!((path.length - expect).abs() < 1e-9);
                prop_assert_eq!(path.cells.first(), Some(&a));
                prop_assert_eq!(path.cells.last(), Some(&b));
                let mut walked = 0.0;
                for w in path.cells.windows(2) {
                    prop_assert!(map.is_free(w[1]));
                    let (dx, dy) = (w[1].x.abs_diff(w[0].x), w[1].y.abs_diff(w[0].y));
                    prop_assert!(dx <= 1 && dy <= 1 && dx + dy > 0);
                    walked += if dx + dy == 2 { SQRT_2 } else { 1.0 };
                }
                prop_assert!((walked - expect).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn triangle_inequality(map in small_map(), conn in connectivities()) {
        let cells = free_cells(&map);
        let fields: Vec<Distances> =
            cells.iter().map(|&c| shortest_distances(&map, c, conn)).collect();
        for (i, fa) in fields.iter().enumerate() {
            for (j, &b) in cells.iter().enumerate() {
                for &c in &cells {
                    let direct = fa.get(c);
                    let via = fa.get(b) + fields[j].get(c);
                    prop_assert!(direct <= via + 1e-9, "{} {b} {c}", cells[i]);
                }
            }
        }
    }

    #[test]
    fn path_cost_order_matches_lengths(a in 0u32..5000, b in 0u32..5000, c in 0u32..5000, d in 0u32..5000) {
        let (x, y) = (PathCost::new(a, b), PathCost::new(c, d));
        let (lx, ly): (f64, f64) = (x.length(1.0), y.length(1.0));
        // Distinct integer combinations differ by far more than rounding.
        if (lx - ly).abs() > 1e-6 {
            prop_assert_eq!(x < y, lx < ly);
        } else {
            prop_assert_eq!(x, y);
        }
    }

    #[test]
    fn line_of_sight_is_symmetric(map in small_map()) {
        let cells = free_cells(&map);
        for &a in &cells {
            for &b in &cells {
                prop_assert_eq!(line_of_sight(&map, a, b), line_of_sight(&map, b, a));
            }
        }
    }

    #[test]
    fn an_extra_obstacle_never_widens_the_view(map in small_map(), pick in any::<prop::sample::Index>(), dir in 0usize..8) {
        let sensor = SensorModel::default().with_range(4.0);
        let cells = free_cells(&map);
        let blocker = cells[pick.index(cells.len())];
        prop_assume!(blocker != map.start());
        let denser = map.with_obstacle(blocker).unwrap();
        let theta = std::f64::consts::TAU * dir as f64 / 8.0;
        for &c in &cells {
            if c == blocker {
                continue;
            }
            let pose = Pose::new(c, theta);
            let before: BTreeSet<Cell> = compute_fos(&map, pose, &sensor).smellable_all.into_iter().collect();
            let after: BTreeSet<Cell> = compute_fos(&denser, pose, &sensor).smellable_all.into_iter().collect();
            prop_assert!(after.is_subset(&before), "pose {c} theta {theta}");
        }
    }

    #[test]
    fn scan_stays_within_range_and_reports_consistent_totals(map in small_map(), dir in 0usize..4, r in 1.0f64..6.0) {
        let sensor = SensorModel::default().with_range(r);
        let theta = std::f64::consts::FRAC_PI_2 * dir as f64;
        for c in free_cells(&map) {
            let scan = compute_fos(&map, Pose::new(c, theta), &sensor);
            prop_assert_eq!(scan.info_gain, scan.smellable_new.len());
            prop_assert!(scan.phi_used >= 0.0 && scan.phi_used <= sensor.phi_max);
            for t in &scan.smellable_all {
                let (dx, dy) = (t.x.abs_diff(c.x) as f64, t.y.abs_diff(c.y) as f64);
                prop_assert!((dx * dx + dy * dy).sqrt() <= r + 1e-9);
                prop_assert!(map.is_free(*t));
                prop_assert!(line_of_sight(&map, c, *t));
            }
        }
    }
}
