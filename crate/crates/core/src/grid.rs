//! Occupancy grids and 4-connected cell adjacency.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A grid cell addressed by `(row, col)`.
///
/// Serialized as a two-element array `[row, col]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct Position {
    pub row: usize,
    pub col: usize,
}

impl Position {
    pub const fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }

    pub fn manhattan(self, other: Position) -> usize {
        self.row.abs_diff(other.row) + self.col.abs_diff(other.col)
    }

    /// True when the two cells share an edge.
    pub fn is_adjacent(self, other: Position) -> bool {
        self.manhattan(other) == 1
    }
}

impl From<[usize; 2]> for Position {
    fn from([row, col]: [usize; 2]) -> Self {
        Self { row, col }
    }
}

impl From<Position> for [usize; 2] {
    fn from(p: Position) -> Self {
        [p.row, p.col]
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.row, self.col)
    }
}

/// Movement directions in successor order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Up,
    Down,
    Left,
    Right,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::Up,
        Direction::Down,
        Direction::Left,
        Direction::Right,
    ];
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GridError {
    #[error("grid dimensions must be positive, got {width}x{height}")]
    EmptyDimensions { width: usize, height: usize },
    #[error("expected {expected} cells for the declared dimensions, got {actual}")]
    CellCountMismatch { expected: usize, actual: usize },
    #[error("grid has no free cell")]
    NoFreeCell,
}

/// Rectangular occupancy grid, row-major. `true` marks a blocked cell.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GridMap {
    width: usize,
    height: usize,
    blocked: Vec<bool>,
}

impl GridMap {
    pub fn new(width: usize, height: usize, blocked: Vec<bool>) -> Result<Self, GridError> {
        if width == 0 || height == 0 {
            return Err(GridError::EmptyDimensions { width, height });
        }
        if blocked.len() != width * height {
            return Err(GridError::CellCountMismatch {
                expected: width * height,
                actual: blocked.len(),
            });
        }
        if blocked.iter().all(|&b| b) {
            return Err(GridError::NoFreeCell);
        }
        Ok(Self {
            width,
            height,
            blocked,
        })
    }

    /// An obstacle-free grid.
    pub fn open(width: usize, height: usize) -> Result<Self, GridError> {
        Self::new(width, height, vec![false; width * height])
    }

    /// Builds a grid from rows of `.` (free) and `@` (blocked). Handy for tests.
    ///
    /// # Panics
    /// On ragged rows or characters other than `.` and `@`.
    pub fn from_ascii(rows: &[&str]) -> Result<Self, GridError> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.len());
        let mut blocked = Vec::with_capacity(width * height);
        for row in rows {
            assert_eq!(row.len(), width, "ragged ascii grid");
            for ch in row.chars() {
                blocked.push(match ch {
                    '.' => false,
                    '@' => true,
                    other => panic!("unexpected grid character {other:?}"),
                });
            }
        }
        Self::new(width, height, blocked)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cell_count(&self) -> usize {
        self.blocked.len()
    }

    pub fn blocked_cells(&self) -> &[bool] {
        &self.blocked
    }

    pub fn index(&self, p: Position) -> usize {
        p.row * self.width + p.col
    }

    pub fn position(&self, index: usize) -> Position {
        Position::new(index / self.width, index % self.width)
    }

    pub fn in_bounds(&self, p: Position) -> bool {
        p.row < self.height && p.col < self.width
    }

    pub fn is_free(&self, p: Position) -> bool {
        self.in_bounds(p) && !self.blocked[self.index(p)]
    }

    pub fn is_blocked(&self, p: Position) -> bool {
        !self.is_free(p)
    }

    pub fn free_count(&self) -> usize {
        self.blocked.iter().filter(|&&b| !b).count()
    }

    pub fn blocked_fraction(&self) -> f64 {
        (self.cell_count() - self.free_count()) as f64 / self.cell_count() as f64
    }

    pub fn free_cells(&self) -> impl Iterator<Item = Position> + '_ {
        (0..self.blocked.len())
            .filter(|&i| !self.blocked[i])
            .map(|i| self.position(i))
    }

    /// The in-bounds cell one step from `p` in `dir`, free or not.
    pub fn step(&self, p: Position, dir: Direction) -> Option<Position> {
        let next = match dir {
            Direction::Up => Position::new(p.row.checked_sub(1)?, p.col),
            Direction::Down => Position::new(p.row + 1, p.col),
            Direction::Left => Position::new(p.row, p.col.checked_sub(1)?),
            Direction::Right => Position::new(p.row, p.col + 1),
        };
        self.in_bounds(next).then_some(next)
    }

    /// Free 4-neighbors of `p` in Up, Down, Left, Right order. Never includes `p`.
    pub fn neighbors(&self, p: Position) -> Vec<Position> {
        self.neighbor_iter(p).collect()
    }

    pub fn neighbor_iter(&self, p: Position) -> impl Iterator<Item = Position> + '_ {
        Direction::ALL
            .into_iter()
            .filter_map(move |d| self.step(p, d))
            .filter(|&n| self.is_free(n))
    }

    pub(crate) fn set_blocked(&mut self, p: Position, blocked: bool) {
        let i = self.index(p);
        self.blocked[i] = blocked;
    }

    /// Connected-component label per cell (`None` for blocked cells) and the
    /// size of each component, labels in row-major discovery order.
    pub fn components(&self) -> (Vec<Option<usize>>, Vec<usize>) {
        let mut label = vec![None; self.cell_count()];
        let mut sizes = Vec::new();
        let mut queue = VecDeque::new();
        for seed in 0..self.cell_count() {
            if self.blocked[seed] || label[seed].is_some() {
                continue;
            }
            let id = sizes.len();
            let mut size = 0;
            label[seed] = Some(id);
            queue.push_back(self.position(seed));
            while let Some(p) = queue.pop_front() {
                size += 1;
                for n in self.neighbor_iter(p) {
                    let ni = self.index(n);
                    if label[ni].is_none() {
                        label[ni] = Some(id);
                        queue.push_back(n);
                    }
                }
            }
            sizes.push(size);
        }
        (label, sizes)
    }

    /// Cells of the largest free component, row-major. Ties go to the
    /// component discovered first.
    pub fn largest_component(&self) -> Vec<Position> {
        let (label, sizes) = self.components();
        let Some(best) = (0..sizes.len()).max_by_key(|&i| (sizes[i], std::cmp::Reverse(i))) else {
            return Vec::new();
        };
        (0..self.cell_count())
            .filter(|&i| label[i] == Some(best))
            .map(|i| self.position(i))
            .collect()
    }

    pub fn is_connected(&self) -> bool {
        self.components().1.len() <= 1
    }

    /// Shortest 4-connected distance ignoring time and other agents.
    pub fn shortest_distance(&self, from: Position, to: Position) -> Option<usize> {
        if !self.is_free(from) || !self.is_free(to) {
            return None;
        }
        let mut dist = vec![usize::MAX; self.cell_count()];
        let mut queue = VecDeque::from([from]);
        dist[self.index(from)] = 0;
        while let Some(p) = queue.pop_front() {
            let d = dist[self.index(p)];
            if p == to {
                return Some(d);
            }
            for n in self.neighbor_iter(p) {
                let ni = self.index(n);
                if dist[ni] == usize::MAX {
                    dist[ni] = d + 1;
                    queue.push_back(n);
                }
            }
        }
        None
    }
}
