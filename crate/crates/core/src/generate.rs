//! Seeded random maze and warehouse map generators.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::grid::{GridMap, Position};

/// Allowed deviation between requested and achieved obstacle density.
pub const DENSITY_TOLERANCE: f64 = 0.03;
/// Minimum share of free cells in the largest component of a generated maze.
pub const MIN_CONNECTED_SHARE: f64 = 0.9;
const MAX_ATTEMPTS: u64 = 16;

#[derive(Debug, Error, PartialEq)]
pub enum GenerateError {
    #[error("obstacle density {0} outside [0, 0.9]")]
    Density(f64),
    #[error("{width}x{height} is too small (need at least {min}x{min})")]
    TooSmall {
        width: usize,
        height: usize,
        min: usize,
    },
    #[error("could not reach density {density} with a connected layout after {attempts} attempts")]
    Exhausted { density: f64, attempts: u64 },
}

/// Random obstacle field with the requested blocked fraction whose free cells
/// stay connected.
///
/// Obstacles are placed in shuffled order and a placement is kept only if the
/// free cells remain one component. Passes repeat until the target count is
/// reached or no further cell can be blocked.
pub fn generate_maze(
    width: usize,
    height: usize,
    density: f64,
    seed: u64,
) -> Result<GridMap, GenerateError> {
    if !(0.0..=0.9).contains(&density) || density.is_nan() {
        return Err(GenerateError::Density(density));
    }
    if width == 0 || height == 0 {
        return Err(GenerateError::TooSmall {
            width,
            height,
            min: 1,
        });
    }
    let cells = width * height;
    let target = ((density * cells as f64).round() as usize).min(cells - 1);

    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(
            seed.wrapping_add(attempt.wrapping_mul(0x9E37_79B9_7F4A_7C15)),
        );
        let map = place_connected_obstacles(width, height, target, &mut rng);
        let achieved = map.blocked_fraction();
        let (_, sizes) = map.components();
        let largest = sizes.iter().copied().max().unwrap_or(0);
        if (achieved - density).abs() <= DENSITY_TOLERANCE + 1e-12
            && largest as f64 >= MIN_CONNECTED_SHARE * map.free_count() as f64
        {
            return Ok(map);
        }
    }
    Err(GenerateError::Exhausted {
        density,
        attempts: MAX_ATTEMPTS,
    })
}

fn place_connected_obstacles(
    width: usize,
    height: usize,
    target: usize,
    rng: &mut ChaCha8Rng,
) -> GridMap {
    let mut map = GridMap::open(width, height).expect("positive dimensions");
    let mut order: Vec<usize> = (0..width * height).collect();
    order.shuffle(rng);

    let mut placed = 0;
    while placed < target {
        let before = placed;
        for &i in &order {
            if placed == target {
                break;
            }
            if map.blocked_cells()[i] {
                continue;
            }
            let p = map.position(i);
            map.set_blocked(p, true);
            if free_cells_connected(&map) {
                placed += 1;
            } else {
                map.set_blocked(p, false);
            }
        }
        if placed == before {
            break;
        }
    }
    map
}

fn free_cells_connected(map: &GridMap) -> bool {
    let Some(start) = map.free_cells().next() else {
        return false;
    };
    let mut seen = vec![false; map.cell_count()];
    let mut stack = vec![start];
    seen[map.index(start)] = true;
    let mut reached = 0;
    while let Some(p) = stack.pop() {
        reached += 1;
        for n in map.neighbor_iter(p) {
            let ni = map.index(n);
            if !seen[ni] {
                seen[ni] = true;
                stack.push(n);
            }
        }
    }
    reached == map.free_count()
}

/// Smallest side accepted by [`generate_warehouse`].
pub const WAREHOUSE_MIN_SIDE: usize = 7;
const WAREHOUSE_TARGET_DENSITY: f64 = 0.24;
const WAREHOUSE_BAND: (f64, f64) = (0.20, 0.28);

#[derive(Debug, Clone, Copy, PartialEq)]
struct ShelfLayout {
    shelf_w: usize,
    shelf_h: usize,
    aisle_x: usize,
    aisle_y: usize,
}

impl ShelfLayout {
    /// Top-left corners of every shelf. A one-cell aisle rings the map.
    fn shelves(&self, width: usize, height: usize) -> Vec<Position> {
        let starts = |dim: usize, size: usize, aisle: usize| -> Vec<usize> {
            (1..)
                .step_by(size + aisle)
                .take_while(|&s| s + size < dim)
                .collect()
        };
        let rows = starts(height, self.shelf_h, self.aisle_y);
        let cols = starts(width, self.shelf_w, self.aisle_x);
        rows.iter()
            .flat_map(|&r| cols.iter().map(move |&c| Position::new(r, c)))
            .collect()
    }

    fn blocked(&self, width: usize, height: usize) -> usize {
        self.shelves(width, height).len() * self.shelf_w * self.shelf_h
    }
}

/// Warehouse floor: rectangular shelf blocks on a regular lattice separated
/// by aisles at least one cell wide, with a free border aisle.
///
/// The seed picks one lattice layout with density in `[0.20, 0.28]`, or one
/// of those closest to 0.24 when none falls in that band. The result is fully
/// determined by `(width, height, seed)`.
pub fn generate_warehouse(
    width: usize,
    height: usize,
    seed: u64,
) -> Result<GridMap, GenerateError> {
    if width < WAREHOUSE_MIN_SIDE || height < WAREHOUSE_MIN_SIDE {
        return Err(GenerateError::TooSmall {
            width,
            height,
            min: WAREHOUSE_MIN_SIDE,
        });
    }
    let cells = (width * height) as f64;
    let mut candidates = Vec::new();
    for shelf_w in 1..=6 {
        for shelf_h in 1..=6 {
            // Elongated shelves only; 1x1 pillars are not shelving.
            if shelf_w.max(shelf_h) < 2 || shelf_w.min(shelf_h) > 2 {
                continue;
            }
            for aisle_x in 1..=2 {
                for aisle_y in 1..=2 {
                    let layout = ShelfLayout {
                        shelf_w,
                        shelf_h,
                        aisle_x,
                        aisle_y,
                    };
                    let blocked = layout.blocked(width, height);
                    if blocked > 0 {
                        candidates.push((layout, blocked as f64 / cells));
                    }
                }
            }
        }
    }
    let in_band: Vec<_> = candidates
        .iter()
        .filter(|(_, d)| (WAREHOUSE_BAND.0..=WAREHOUSE_BAND.1).contains(d))
        .copied()
        .collect();
    let pool = if in_band.is_empty() {
        let best = candidates
            .iter()
            .map(|(_, d)| (d - WAREHOUSE_TARGET_DENSITY).abs())
            .fold(f64::INFINITY, f64::min);
        candidates
            .into_iter()
            .filter(|(_, d)| (d - WAREHOUSE_TARGET_DENSITY).abs() <= best + 1e-12)
            .collect()
    } else {
        in_band
    };
    let (layout, _) =
        *pool
            .choose(&mut ChaCha8Rng::seed_from_u64(seed))
            .ok_or(GenerateError::TooSmall {
                width,
                height,
                min: WAREHOUSE_MIN_SIDE,
            })?;

    let mut map = GridMap::open(width, height).expect("positive dimensions");
    for corner in layout.shelves(width, height) {
        for dr in 0..layout.shelf_h {
            for dc in 0..layout.shelf_w {
                map.set_blocked(Position::new(corner.row + dr, corner.col + dc), true);
            }
        }
    }
    Ok(map)
}
