//! Vertex and edge conflict detection over a trajectory set.
//!
//! The scan walks timesteps `0..=T_M` with per-timestep occupancy and edge
//! indexes, touching each `(agent, t)` pair a constant number of times, so
//! the cost is linear in the total trajectory length. Agents contribute
//! occupancies only while `t <= τ_k` and edge traversals only while
//! `t < τ_k`.

use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::grid::Position;
use crate::trajectory::{Trajectory, TrajectorySet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConflictKind {
    Vertex,
    Edge,
}

/// Where a conflict happens. Variant order makes vertex conflicts sort first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConflictLocation {
    Vertex(Position),
    /// Traversal direction of the lower-id agent, departing at the conflict time.
    Edge {
        from: Position,
        to: Position,
    },
}

impl ConflictLocation {
    pub fn kind(&self) -> ConflictKind {
        match self {
            ConflictLocation::Vertex(_) => ConflictKind::Vertex,
            ConflictLocation::Edge { .. } => ConflictKind::Edge,
        }
    }

    /// The conflict cells: one for a vertex conflict, two for an edge conflict.
    pub fn cells(&self) -> Vec<Position> {
        match *self {
            ConflictLocation::Vertex(p) => vec![p],
            ConflictLocation::Edge { from, to } => vec![from, to],
        }
    }
}

/// A collision `(t, Δ, A)`. `agents` is sorted ascending; field order gives
/// the detection ordering (time, vertex-first, location, agents).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "ConflictRecord", try_from = "ConflictRecord")]
pub struct Conflict {
    pub time: usize,
    pub location: ConflictLocation,
    pub agents: Vec<usize>,
}

impl Conflict {
    pub fn kind(&self) -> ConflictKind {
        self.location.kind()
    }

    pub fn involves(&self, agent: usize) -> bool {
        self.agents.binary_search(&agent).is_ok()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum LocationRecord {
    Vertex(Position),
    Edge([Position; 2]),
}

#[derive(Serialize, Deserialize)]
struct ConflictRecord {
    t: usize,
    kind: ConflictKind,
    loc: LocationRecord,
    agents: Vec<usize>,
}

impl From<Conflict> for ConflictRecord {
    fn from(c: Conflict) -> Self {
        let loc = match c.location {
            ConflictLocation::Vertex(p) => LocationRecord::Vertex(p),
            ConflictLocation::Edge { from, to } => LocationRecord::Edge([from, to]),
        };
        ConflictRecord {
            t: c.time,
            kind: c.location.kind(),
            loc,
            agents: c.agents,
        }
    }
}

impl TryFrom<ConflictRecord> for Conflict {
    type Error = String;

    fn try_from(r: ConflictRecord) -> Result<Self, Self::Error> {
        let location = match (r.kind, r.loc) {
            (ConflictKind::Vertex, LocationRecord::Vertex(p)) => ConflictLocation::Vertex(p),
            (ConflictKind::Edge, LocationRecord::Edge([from, to])) => {
                ConflictLocation::Edge { from, to }
            }
            _ => return Err("conflict kind does not match location shape".into()),
        };
        let mut agents = r.agents;
        agents.sort_unstable();
        Ok(Conflict {
            time: r.t,
            location,
            agents,
        })
    }
}

/// Work counters for one detection pass.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DetectionStats {
    pub timesteps: usize,
    /// Occupancy and edge index insertions plus reverse-edge lookups.
    pub index_ops: usize,
}

/// Per-timestep indexes, reused across timesteps to avoid reallocation.
#[derive(Default)]
struct Scanner {
    occupancy: HashMap<Position, usize>,
    pileups: HashMap<Position, Vec<usize>>,
    moves: HashMap<(Position, Position), usize>,
    extra_moves: Vec<((Position, Position), usize)>,
    stats: DetectionStats,
}

impl Scanner {
    /// Conflicts at timestep `t` among `active` agents (all with `τ >= t`), unsorted.
    fn conflicts_at(&mut self, t: usize, active: &[&Trajectory], out: &mut Vec<Conflict>) {
        self.occupancy.clear();
        self.pileups.clear();
        self.moves.clear();
        self.extra_moves.clear();
        self.stats.timesteps += 1;

        for traj in active {
            let cell = traj.cells[t];
            self.stats.index_ops += 1;
            if let Some(&first) = self.occupancy.get(&cell) {
                self.pileups
                    .entry(cell)
                    .or_insert_with(|| vec![first])
                    .push(traj.agent);
            } else {
                self.occupancy.insert(cell, traj.agent);
            }
            if t < traj.makespan() {
                let next = traj.cells[t + 1];
                if next != cell {
                    self.stats.index_ops += 1;
                    match self.moves.entry((cell, next)) {
                        Entry::Occupied(_) => self.extra_moves.push(((cell, next), traj.agent)),
                        Entry::Vacant(slot) => {
                            slot.insert(traj.agent);
                        }
                    }
                }
            }
        }

        for (&cell, agents) in &self.pileups {
            let mut agents = agents.clone();
            agents.sort_unstable();
            out.push(Conflict {
                time: t,
                location: ConflictLocation::Vertex(cell),
                agents,
            });
        }

        let movers = self
            .moves
            .iter()
            .map(|(&k, &a)| (k, a))
            .chain(self.extra_moves.iter().copied());
        for ((from, to), a) in movers {
            self.stats.index_ops += 1;
            let reverse = (to, from);
            let opposite = self.moves.get(&reverse).copied().into_iter().chain(
                self.extra_moves
                    .iter()
                    .filter(|(k, _)| *k == reverse)
                    .map(|&(_, b)| b),
            );
            for b in opposite {
                // Each swapping pair is seen from both sides; keep the lower id's view.
                if a < b {
                    out.push(Conflict {
                        time: t,
                        location: ConflictLocation::Edge { from, to },
                        agents: vec![a, b],
                    });
                }
            }
        }
    }

    /// Visits each timestep that has conflicts, in time order, with its sorted conflicts.
    fn scan<B>(
        &mut self,
        trajs: &[&Trajectory],
        mut visit: impl FnMut(Vec<Conflict>) -> ControlFlow<B>,
    ) -> Option<B> {
        let mut by_makespan: Vec<&Trajectory> = trajs.to_vec();
        by_makespan.sort_by_key(|t| std::cmp::Reverse(t.makespan()));
        let mut active = by_makespan.len();
        let horizon = by_makespan.first().map_or(0, |t| t.makespan());
        let mut found = Vec::new();
        for t in 0..=horizon {
            while active > 0 && by_makespan[active - 1].makespan() < t {
                active -= 1;
            }
            self.conflicts_at(t, &by_makespan[..active], &mut found);
            if !found.is_empty() {
                found.sort_unstable();
                if let ControlFlow::Break(b) = visit(std::mem::take(&mut found)) {
                    return Some(b);
                }
            }
        }
        None
    }
}

/// All conflicts in detection order.
pub fn detect_conflicts(set: &TrajectorySet) -> Vec<Conflict> {
    detect_conflicts_with_stats(set).0
}

pub fn detect_conflicts_with_stats(set: &TrajectorySet) -> (Vec<Conflict>, DetectionStats) {
    detect_conflicts_in(&set.iter().collect::<Vec<_>>())
}

/// Detection over borrowed trajectories; agent ids come from each trajectory.
pub fn detect_conflicts_in(trajs: &[&Trajectory]) -> (Vec<Conflict>, DetectionStats) {
    let mut scanner = Scanner::default();
    let mut all = Vec::new();
    scanner.scan::<()>(trajs, |batch| {
        all.extend(batch);
        ControlFlow::Continue(())
    });
    (all, scanner.stats)
}

/// The first conflict in detection order, stopping at the earliest
/// conflicting timestep.
pub fn first_conflict(set: &TrajectorySet) -> Option<Conflict> {
    first_conflict_in(&set.iter().collect::<Vec<_>>())
}

pub fn first_conflict_in(trajs: &[&Trajectory]) -> Option<Conflict> {
    Scanner::default().scan(trajs, |batch| {
        ControlFlow::Break(batch.into_iter().next().expect("non-empty batch"))
    })
}

/// Number of conflicts whose agent set contains `agent`.
pub fn conflict_count_per_agent(conflicts: &[Conflict], agent: usize) -> usize {
    conflicts.iter().filter(|c| c.involves(agent)).count()
}
