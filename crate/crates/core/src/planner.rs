//! Single-agent space-time search under timed constraints.
//!
//! Nodes are `(cell, t)`; successors are the four moves followed by WAIT.
//! Once `t` passes the last constrained timestep the constraint set no longer
//! depends on time, so later nodes are keyed by cell alone. This keeps the
//! search finite and lets it prove unreachability without walking the whole
//! horizon.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{Direction, GridMap, Position};
use crate::trajectory::Trajectory;

/// Prohibitions honored by [`plan`].
///
/// When a window is set, timed entries outside it are dropped on insertion.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConstraintSet {
    /// Cell -> first timestep from which it is forbidden forever.
    forbidden_cells: HashMap<Position, usize>,
    forbidden_cell_times: HashSet<(Position, usize)>,
    /// `(from, to, t)`: moving `from -> to` departing at `t`.
    forbidden_edges: HashSet<(Position, Position, usize)>,
    window: Option<(usize, usize)>,
}

impl ConstraintSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn windowed(lo: usize, hi: usize) -> Self {
        Self {
            window: Some((lo, hi)),
            ..Self::default()
        }
    }

    pub fn window(&self) -> Option<(usize, usize)> {
        self.window
    }

    fn in_window(&self, t: usize) -> bool {
        self.window.is_none_or(|(lo, hi)| (lo..=hi).contains(&t))
    }

    /// Forbid `cell` at every timestep `>= from`.
    pub fn forbid_cell_from(&mut self, cell: Position, from: usize) {
        let entry = self.forbidden_cells.entry(cell).or_insert(from);
        *entry = (*entry).min(from);
    }

    pub fn forbid_cell_at(&mut self, cell: Position, t: usize) {
        if self.in_window(t) {
            self.forbidden_cell_times.insert((cell, t));
        }
    }

    pub fn forbid_edge(&mut self, from: Position, to: Position, t: usize) {
        if self.in_window(t) {
            self.forbidden_edges.insert((from, to, t));
        }
    }

    pub fn forbidden_cells(&self) -> impl Iterator<Item = (Position, usize)> + '_ {
        self.forbidden_cells.iter().map(|(&c, &t)| (c, t))
    }

    pub fn is_empty(&self) -> bool {
        self.forbidden_cells.is_empty()
            && self.forbidden_cell_times.is_empty()
            && self.forbidden_edges.is_empty()
    }

    pub fn cell_allowed(&self, cell: Position, t: usize) -> bool {
        !self
            .forbidden_cells
            .get(&cell)
            .is_some_and(|&from| t >= from)
            && !self.forbidden_cell_times.contains(&(cell, t))
    }

    pub fn edge_allowed(&self, from: Position, to: Position, t: usize) -> bool {
        !self.forbidden_edges.contains(&(from, to, t))
    }

    /// First timestep from which constraint checks no longer depend on time.
    pub fn stable_after(&self) -> usize {
        let cells = self.forbidden_cells.values().copied();
        let timed = self.forbidden_cell_times.iter().map(|&(_, t)| t + 1);
        let edges = self.forbidden_edges.iter().map(|&(_, _, t)| t + 1);
        cells.chain(timed).chain(edges).max().unwrap_or(0)
    }

    /// Every constraint a segment starting at `start_time` breaks, as
    /// `(timestep, description)` pairs.
    pub fn violations(&self, start_time: usize, cells: &[Position]) -> Vec<(usize, String)> {
        let mut out = Vec::new();
        for (i, &c) in cells.iter().enumerate() {
            let t = start_time + i;
            if !self.cell_allowed(c, t) {
                out.push((t, format!("cell {c} forbidden")));
            }
            if let Some(&next) = cells.get(i + 1) {
                if !self.edge_allowed(c, next, t) {
                    out.push((t, format!("edge {c} -> {next} forbidden")));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SearchKind {
    Bfs,
    /// Orders the frontier by `g + weight * manhattan`.
    WeightedAStar {
        weight: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlannerKind {
    pub search: SearchKind,
    /// Node expansion budget; `None` uses [`PlannerKind::default_budget`].
    pub max_expansions: Option<usize>,
}

pub const DEFAULT_ASTAR_WEIGHT: f64 = 1.5;

impl PlannerKind {
    pub const fn bfs() -> Self {
        Self {
            search: SearchKind::Bfs,
            max_expansions: None,
        }
    }

    /// # Panics
    /// If `weight < 1`.
    pub fn weighted_astar(weight: f64) -> Self {
        assert!(weight >= 1.0, "A* weight must be at least 1, got {weight}");
        Self {
            search: SearchKind::WeightedAStar { weight },
            max_expansions: None,
        }
    }

    pub fn with_max_expansions(mut self, max: usize) -> Self {
        self.max_expansions = Some(max);
        self
    }

    /// `4 * width * height * T_cap`.
    pub fn default_budget(map: &GridMap) -> usize {
        4 * map.width() * map.height() * horizon_cap(map)
    }

    fn budget(&self, map: &GridMap) -> usize {
        self.max_expansions
            .unwrap_or_else(|| Self::default_budget(map))
    }
}

/// Maximum number of steps in one planned segment: `4 * (width + height)`.
pub fn horizon_cap(map: &GridMap) -> usize {
    4 * (map.width() + map.height())
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum PlanError {
    #[error("goal unreachable under the constraints")]
    Unreachable,
    #[error("expansion budget of {0} nodes exhausted")]
    ExpansionBudget(usize),
    #[error("no path within the {0}-step horizon")]
    HorizonExceeded(usize),
    #[error("start cell is forbidden at the start time")]
    StartForbidden,
    #[error("goal cell is among the forbidden cells")]
    GoalBlocked,
}

/// A planned path beginning at `start_time`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub start_time: usize,
    pub cells: Vec<Position>,
}

impl Segment {
    /// Steps taken, `len - 1`.
    pub fn duration(&self) -> usize {
        self.cells.len() - 1
    }

    /// Arrival timestep.
    pub fn end_time(&self) -> usize {
        self.start_time + self.duration()
    }

    pub fn into_trajectory(self, agent: usize) -> Trajectory {
        Trajectory::new(agent, self.cells).expect("segments are non-empty")
    }
}

struct Node {
    cell: Position,
    t: usize,
    parent: Option<usize>,
}

#[derive(PartialEq)]
struct Ranked {
    f: f64,
    seq: usize,
}

impl Eq for Ranked {}

impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on (f, insertion order).
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

enum Frontier {
    Fifo(VecDeque<usize>),
    Heap(BinaryHeap<Ranked>, f64),
}

impl Frontier {
    fn push(&mut self, node: usize, g: usize, h: usize) {
        match self {
            Frontier::Fifo(q) => q.push_back(node),
            Frontier::Heap(heap, w) => heap.push(Ranked {
                f: g as f64 + *w * h as f64,
                seq: node,
            }),
        }
    }

    fn pop(&mut self) -> Option<usize> {
        match self {
            Frontier::Fifo(q) => q.pop_front(),
            Frontier::Heap(heap, _) => heap.pop().map(|r| r.seq),
        }
    }
}

/// Plans from `(start, start_time)` to `goal` honoring `constraints`.
///
/// Ties are broken by insertion order with successors generated Up, Down,
/// Left, Right, Wait, so results are deterministic.
pub fn plan(
    map: &GridMap,
    start: Position,
    goal: Position,
    start_time: usize,
    constraints: &ConstraintSet,
    planner: &PlannerKind,
) -> Result<Segment, PlanError> {
    if !map.is_free(start) || !map.is_free(goal) {
        return Err(PlanError::Unreachable);
    }
    if !constraints.cell_allowed(start, start_time) {
        return Err(PlanError::StartForbidden);
    }
    let cap = horizon_cap(map);
    let budget = planner.budget(map);
    let stable = constraints.stable_after().max(start_time);
    let key = |cell: Position, t: usize| (cell, t.min(stable));

    let mut frontier = match planner.search {
        SearchKind::Bfs => Frontier::Fifo(VecDeque::new()),
        SearchKind::WeightedAStar { weight } => Frontier::Heap(BinaryHeap::new(), weight),
    };
    let mut nodes = vec![Node {
        cell: start,
        t: start_time,
        parent: None,
    }];
    // Earliest arrival time recorded per (possibly time-collapsed) state.
    let mut best: HashMap<(Position, usize), usize> =
        HashMap::from([(key(start, start_time), start_time)]);
    frontier.push(0, 0, start.manhattan(goal));

    let mut expansions = 0;
    let mut hit_horizon = false;
    while let Some(id) = frontier.pop() {
        let (cell, t) = (nodes[id].cell, nodes[id].t);
        if best.get(&key(cell, t)).is_some_and(|&bt| bt < t) {
            continue;
        }
        if cell == goal {
            let mut cells = Vec::with_capacity(t - start_time + 1);
            let mut cur = Some(id);
            while let Some(i) = cur {
                cells.push(nodes[i].cell);
                cur = nodes[i].parent;
            }
            cells.reverse();
            return Ok(Segment { start_time, cells });
        }
        if expansions == budget {
            return Err(PlanError::ExpansionBudget(budget));
        }
        expansions += 1;
        if t - start_time == cap {
            hit_horizon = true;
            continue;
        }

        let moves = Direction::ALL
            .into_iter()
            .map(|d| map.step(cell, d))
            .chain([Some(cell)]);
        for next in moves.flatten() {
            let nt = t + 1;
            if !map.is_free(next) || !constraints.cell_allowed(next, nt) {
                continue;
            }
            if next != cell && !constraints.edge_allowed(cell, next, t) {
                continue;
            }
            let k = key(next, nt);
            if best.get(&k).is_some_and(|&bt| bt <= nt) {
                continue;
            }
            best.insert(k, nt);
            nodes.push(Node {
                cell: next,
                t: nt,
                parent: Some(id),
            });
            frontier.push(nodes.len() - 1, nt - start_time, next.manhattan(goal));
        }
    }
    if hit_horizon {
        Err(PlanError::HorizonExceeded(cap))
    } else {
        Err(PlanError::Unreachable)
    }
}

/// Replans while treating `conflict_cells` as obstacles from `state.1` on.
pub fn replan_static(
    map: &GridMap,
    state: (Position, usize),
    goal: Position,
    conflict_cells: &[Position],
    planner: &PlannerKind,
) -> Result<Segment, PlanError> {
    let (at, t) = state;
    if conflict_cells.contains(&goal) {
        return Err(PlanError::GoalBlocked);
    }
    if conflict_cells.contains(&at) {
        return Err(PlanError::StartForbidden);
    }
    let mut constraints = ConstraintSet::new();
    for &c in conflict_cells {
        constraints.forbid_cell_from(c, t);
    }
    plan(map, at, goal, t, &constraints, planner)
}

/// Another agent's cells over a time window, `cells[i]` at `start_time + i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Track {
    pub agent: usize,
    pub start_time: usize,
    pub cells: Vec<Position>,
}

impl Track {
    /// `traj` clipped to `[lo, hi]` and to its own lifetime; `None` if empty.
    pub fn clip(traj: &Trajectory, lo: usize, hi: usize) -> Option<Track> {
        let end = hi.min(traj.makespan());
        (lo <= end).then(|| Track {
            agent: traj.agent,
            start_time: lo,
            cells: traj.cells[lo..=end].to_vec(),
        })
    }

    pub fn end_time(&self) -> usize {
        self.start_time + self.cells.len() - 1
    }

    /// Adds the track's occupancies and reversed traversals to `constraints`.
    pub fn add_to(&self, constraints: &mut ConstraintSet) {
        for (i, &c) in self.cells.iter().enumerate() {
            let t = self.start_time + i;
            constraints.forbid_cell_at(c, t);
            if let Some(&next) = self.cells.get(i + 1) {
                if next != c {
                    constraints.forbid_edge(next, c, t);
                }
            }
        }
    }
}

/// Replans while avoiding the given tracks as timed obstacles, including
/// swaps along their traversed edges.
pub fn replan_dynamic(
    map: &GridMap,
    state: (Position, usize),
    goal: Position,
    tracks: &[Track],
    planner: &PlannerKind,
) -> Result<Segment, PlanError> {
    let lo = tracks.iter().map(|t| t.start_time).min().unwrap_or(state.1);
    let hi = tracks.iter().map(Track::end_time).max().unwrap_or(state.1);
    let mut constraints = ConstraintSet::windowed(lo, hi);
    for track in tracks {
        track.add_to(&mut constraints);
    }
    plan(map, state.0, goal, state.1, &constraints, planner)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(r: usize, c: usize) -> Position {
        Position::new(r, c)
    }

    const BOTH: [PlannerKind; 2] = [
        PlannerKind::bfs(),
        PlannerKind {
            search: SearchKind::WeightedAStar { weight: 1.5 },
            max_expansions: None,
        },
    ];

    #[test]
    fn straight_corridor() {
        let map = GridMap::open(5, 1).unwrap();
        for planner in &BOTH {
            let seg = plan(&map, p(0, 0), p(0, 4), 0, &ConstraintSet::new(), planner).unwrap();
            assert_eq!(seg.duration(), 4);
            assert_eq!(seg.cells, (0..5).map(|c| p(0, c)).collect::<Vec<_>>());
        }
    }

    #[test]
    fn start_is_goal() {
        let map = GridMap::open(3, 3).unwrap();
        let seg = plan(
            &map,
            p(1, 1),
            p(1, 1),
            7,
            &ConstraintSet::new(),
            &PlannerKind::bfs(),
        )
        .unwrap();
        assert_eq!(seg.cells, vec![p(1, 1)]);
        assert_eq!(seg.end_time(), 7);
    }

    #[test]
    fn waits_for_timed_constraint_in_corridor() {
        let map = GridMap::open(4, 1).unwrap();
        let mut cs = ConstraintSet::new();
        cs.forbid_cell_at(p(0, 1), 1);
        let seg = plan(&map, p(0, 0), p(0, 3), 0, &cs, &PlannerKind::bfs()).unwrap();
        assert_eq!(seg.cells, vec![p(0, 0), p(0, 0), p(0, 1), p(0, 2), p(0, 3)]);
        assert!(cs.violations(0, &seg.cells).is_empty());
    }

    #[test]
    fn forbidden_edge_is_respected() {
        let map = GridMap::open(2, 1).unwrap();
        let mut cs = ConstraintSet::new();
        cs.forbid_edge(p(0, 0), p(0, 1), 0);
        let seg = plan(&map, p(0, 0), p(0, 1), 0, &cs, &PlannerKind::bfs()).unwrap();
        assert_eq!(seg.cells, vec![p(0, 0), p(0, 0), p(0, 1)]);
    }

    #[test]
    fn failures_are_distinguishable() {
        let walled = GridMap::from_ascii(&[".@."]).unwrap();
        let cs = ConstraintSet::new();
        assert_eq!(
            plan(&walled, p(0, 0), p(0, 2), 0, &cs, &PlannerKind::bfs()),
            Err(PlanError::Unreachable)
        );
        let open = GridMap::open(8, 8).unwrap();
        assert_eq!(
            plan(
                &open,
                p(0, 0),
                p(7, 7),
                0,
                &cs,
                &PlannerKind::bfs().with_max_expansions(3)
            ),
            Err(PlanError::ExpansionBudget(3))
        );
        // A cell blocked at every step up to beyond the horizon.
        let corridor = GridMap::open(3, 1).unwrap();
        let mut cs = ConstraintSet::new();
        for t in 0..100 {
            cs.forbid_cell_at(p(0, 1), t);
        }
        assert_eq!(
            plan(&corridor, p(0, 0), p(0, 2), 0, &cs, &PlannerKind::bfs()),
            Err(PlanError::HorizonExceeded(16))
        );
        let mut cs = ConstraintSet::new();
        cs.forbid_cell_at(p(0, 0), 0);
        assert_eq!(
            plan(&corridor, p(0, 0), p(0, 2), 0, &cs, &PlannerKind::bfs()),
            Err(PlanError::StartForbidden)
        );
    }

    #[test]
    fn static_replan_cases() {
        let map = GridMap::open(5, 3).unwrap();
        let free = plan(
            &map,
            p(1, 0),
            p(1, 4),
            2,
            &ConstraintSet::new(),
            &PlannerKind::bfs(),
        )
        .unwrap();
        // A conflict cell off the shortest path changes nothing.
        let seg =
            replan_static(&map, (p(1, 0), 2), p(1, 4), &[p(0, 2)], &PlannerKind::bfs()).unwrap();
        assert_eq!(seg, free);
        // On the path: the route detours around it.
        let seg =
            replan_static(&map, (p(1, 0), 2), p(1, 4), &[p(1, 2)], &PlannerKind::bfs()).unwrap();
        assert!(!seg.cells.contains(&p(1, 2)));
        assert_eq!(seg.duration(), 6);

        let corridor = GridMap::open(5, 1).unwrap();
        assert_eq!(
            replan_static(
                &corridor,
                (p(0, 0), 0),
                p(0, 4),
                &[p(0, 2)],
                &PlannerKind::bfs()
            ),
            Err(PlanError::Unreachable)
        );
        assert_eq!(
            replan_static(
                &corridor,
                (p(0, 0), 0),
                p(0, 4),
                &[p(0, 4)],
                &PlannerKind::bfs()
            ),
            Err(PlanError::GoalBlocked)
        );
        assert_eq!(
            replan_static(
                &corridor,
                (p(0, 0), 0),
                p(0, 4),
                &[p(0, 0)],
                &PlannerKind::bfs()
            ),
            Err(PlanError::StartForbidden)
        );
    }

    #[test]
    fn dynamic_replan_ignores_distant_track() {
        let map = GridMap::open(5, 3).unwrap();
        let free = plan(
            &map,
            p(1, 0),
            p(1, 4),
            0,
            &ConstraintSet::new(),
            &PlannerKind::bfs(),
        )
        .unwrap();
        let track = Track {
            agent: 1,
            start_time: 0,
            cells: vec![p(2, 4); 5],
        };
        let seg =
            replan_dynamic(&map, (p(1, 0), 0), p(1, 4), &[track], &PlannerKind::bfs()).unwrap();
        assert_eq!(seg, free);
    }

    #[test]
    fn track_clipping() {
        let traj = Trajectory::new(2, vec![p(0, 0), p(0, 1), p(0, 2)]).unwrap();
        let t = Track::clip(&traj, 1, 5).unwrap();
        assert_eq!(t.cells, vec![p(0, 1), p(0, 2)]);
        assert_eq!(t.end_time(), 2);
        assert!(Track::clip(&traj, 3, 5).is_none());
    }

    #[test]
    fn window_drops_outside_entries() {
        let mut cs = ConstraintSet::windowed(2, 4);
        cs.forbid_cell_at(p(0, 0), 1);
        cs.forbid_cell_at(p(0, 0), 3);
        cs.forbid_edge(p(0, 0), p(0, 1), 5);
        assert!(cs.cell_allowed(p(0, 0), 1));
        assert!(!cs.cell_allowed(p(0, 0), 3));
        assert!(cs.edge_allowed(p(0, 0), p(0, 1), 5));
        assert_eq!(cs.stable_after(), 4);
    }
}
