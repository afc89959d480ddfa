//! Timestamped single-agent paths under disappear-at-target semantics.
//!
//! `cells[t]` is the agent's cell at timestep `t`; the agent is removed from
//! the world after its last cell.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{GridMap, Position};
use crate::instance::ProblemInstance;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TrajectoryError {
    #[error("truncation point {keep_through} beyond makespan {makespan}")]
    TruncateOutOfRange {
        keep_through: usize,
        makespan: usize,
    },
    #[error("concatenation discontinuity: {from} -> {to}")]
    Discontinuity { from: Position, to: Position },
    #[error("cannot join trajectories of agents {prefix} and {segment}")]
    AgentMismatch { prefix: usize, segment: usize },
    #[error("empty trajectory")]
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Trajectory {
    #[serde(rename = "agent")]
    pub agent: usize,
    pub cells: Vec<Position>,
}

impl Trajectory {
    pub fn new(agent: usize, cells: Vec<Position>) -> Result<Self, TrajectoryError> {
        if cells.is_empty() {
            return Err(TrajectoryError::Empty);
        }
        Ok(Self { agent, cells })
    }

    /// Arrival timestep, `len - 1`.
    pub fn makespan(&self) -> usize {
        self.cells.len() - 1
    }

    pub fn start(&self) -> Position {
        self.cells[0]
    }

    pub fn end(&self) -> Position {
        *self.cells.last().expect("non-empty")
    }

    /// `None` once the agent has disappeared (`t > makespan`).
    pub fn position_at(&self, t: usize) -> Option<Position> {
        self.cells.get(t).copied()
    }

    /// Prefix `cells[0..=keep_through]`.
    pub fn truncate(&self, keep_through: usize) -> Result<Trajectory, TrajectoryError> {
        if keep_through > self.makespan() {
            return Err(TrajectoryError::TruncateOutOfRange {
                keep_through,
                makespan: self.makespan(),
            });
        }
        Ok(Trajectory {
            agent: self.agent,
            cells: self.cells[..=keep_through].to_vec(),
        })
    }

    /// Suffix starting at timestep `from` (cells re-indexed from zero).
    pub fn suffix(&self, from: usize) -> Option<Trajectory> {
        (from <= self.makespan()).then(|| Trajectory {
            agent: self.agent,
            cells: self.cells[from..].to_vec(),
        })
    }

    /// Joins `segment` after `self`. A segment whose first cell repeats the
    /// prefix's last cell has that cell elided; otherwise the first cell must
    /// be 4-adjacent to it.
    pub fn concat(&self, segment: &Trajectory) -> Result<Trajectory, TrajectoryError> {
        if self.agent != segment.agent {
            return Err(TrajectoryError::AgentMismatch {
                prefix: self.agent,
                segment: segment.agent,
            });
        }
        let last = self.end();
        let first = segment.start();
        let skip = if first == last {
            1
        } else if first.is_adjacent(last) {
            0
        } else {
            return Err(TrajectoryError::Discontinuity {
                from: last,
                to: first,
            });
        };
        let mut cells = Vec::with_capacity(self.cells.len() + segment.cells.len() - skip);
        cells.extend_from_slice(&self.cells);
        cells.extend_from_slice(&segment.cells[skip..]);
        Ok(Trajectory {
            agent: self.agent,
            cells,
        })
    }

    /// Every cell free and every step a wait or a move to a 4-neighbor.
    pub fn is_valid_on(&self, map: &GridMap) -> bool {
        self.cells.iter().all(|&c| map.is_free(c))
            && self
                .cells
                .windows(2)
                .all(|w| w[0] == w[1] || w[0].is_adjacent(w[1]))
    }
}

/// One trajectory per instance agent, indexed by agent id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TrajectorySet {
    trajectories: Vec<Trajectory>,
}

impl TrajectorySet {
    /// # Panics
    /// If `trajectories[i].agent != i` for some `i`.
    pub fn new(trajectories: Vec<Trajectory>) -> Self {
        for (i, t) in trajectories.iter().enumerate() {
            assert_eq!(t.agent, i, "trajectory set must be agent-indexed");
        }
        Self { trajectories }
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    pub fn get(&self, agent: usize) -> &Trajectory {
        &self.trajectories[agent]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Trajectory> {
        self.trajectories.iter()
    }

    pub fn as_slice(&self) -> &[Trajectory] {
        &self.trajectories
    }

    /// # Panics
    /// If the replacement's agent id differs.
    pub fn replace(&mut self, traj: Trajectory) {
        let slot = &mut self.trajectories[traj.agent];
        assert_eq!(slot.agent, traj.agent);
        *slot = traj;
    }

    pub fn makespans(&self) -> Vec<usize> {
        self.trajectories.iter().map(Trajectory::makespan).collect()
    }

    /// `max_i τ_i`, zero for an empty set.
    pub fn makespan(&self) -> usize {
        self.trajectories
            .iter()
            .map(Trajectory::makespan)
            .max()
            .unwrap_or(0)
    }

    pub fn sum_of_costs(&self) -> usize {
        self.trajectories.iter().map(Trajectory::makespan).sum()
    }

    /// Start, goal and step validity of every trajectory against an instance.
    pub fn matches_instance(&self, instance: &ProblemInstance) -> bool {
        self.len() == instance.agent_count()
            && self
                .trajectories
                .iter()
                .zip(instance.agents())
                .all(|(t, task)| {
                    t.start() == task.start && t.end() == task.goal && t.is_valid_on(instance.map())
                })
    }
}

impl<'a> IntoIterator for &'a TrajectorySet {
    type Item = &'a Trajectory;
    type IntoIter = std::slice::Iter<'a, Trajectory>;

    fn into_iter(self) -> Self::IntoIter {
        self.trajectories.iter()
    }
}
