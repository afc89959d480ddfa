//! Result of one solver run, shared by the coordinator and the CBS baseline.

use std::fmt;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::coordinator::AlertMessage;
use crate::metrics::RunMetrics;
use crate::trajectory::TrajectorySet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Solved,
    TimedOut,
    /// Iteration budget spent, search space exhausted, or no agent could replan.
    Stalled,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveStatus::Solved => "solved",
            SolveStatus::TimedOut => "timed_out",
            SolveStatus::Stalled => "stalled",
        })
    }
}

/// Solver-side counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveStats {
    /// Coordinator loop iterations, or CBS high-level expansions.
    pub iterations: usize,
    pub wall_time: Duration,
    /// CBS only: constraint-tree nodes generated.
    pub nodes_generated: usize,
    /// CBS only: conflicts counted across generated nodes.
    pub conflicts_inspected: usize,
}

/// Which kind of solver produced an outcome; decides what `collisions` counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverFamily {
    /// Collisions are alerts issued.
    Alert,
    /// Collisions are high-level conflict expansions.
    Cbs,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub solver: SolverFamily,
    pub status: SolveStatus,
    /// Present exactly when `status == Solved`.
    pub solution: Option<TrajectorySet>,
    /// Independent first plans (coordinator) or root paths (CBS).
    pub initial_paths: Option<TrajectorySet>,
    /// Paths held when the run stopped, conflicting unless solved.
    pub final_paths: Option<TrajectorySet>,
    pub alert_log: Vec<AlertMessage>,
    pub stats: SolveStats,
    pub metrics: RunMetrics,
}

impl SolveOutcome {
    pub fn is_solved(&self) -> bool {
        self.status == SolveStatus::Solved
    }
}
