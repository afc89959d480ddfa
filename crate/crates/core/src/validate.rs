//! Independent solution checker.
//!
//! A direct pairwise reading of the collision definitions, deliberately
//! sharing no code with [`crate::conflict`] so either can be used to audit
//! the other.

use std::fmt;

use crate::grid::Position;
use crate::instance::ProblemInstance;
use crate::trajectory::Trajectory;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    AgentCount {
        expected: usize,
        found: usize,
    },
    WrongAgentId {
        index: usize,
        found: usize,
    },
    WrongStart {
        agent: usize,
    },
    WrongGoal {
        agent: usize,
    },
    BlockedCell {
        agent: usize,
        t: usize,
        cell: Position,
    },
    IllegalStep {
        agent: usize,
        t: usize,
    },
    Vertex {
        t: usize,
        agents: (usize, usize),
        cell: Position,
    },
    Edge {
        t: usize,
        agents: (usize, usize),
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::AgentCount { expected, found } => {
                write!(f, "expected {expected} paths, found {found}")
            }
            Violation::WrongAgentId { index, found } => {
                write!(f, "path {index} labelled agent {found}")
            }
            Violation::WrongStart { agent } => {
                write!(f, "agent {agent} does not start at its start")
            }
            Violation::WrongGoal { agent } => write!(f, "agent {agent} does not end at its goal"),
            Violation::BlockedCell { agent, t, cell } => {
                write!(f, "agent {agent} on blocked cell {cell} at t={t}")
            }
            Violation::IllegalStep { agent, t } => write!(f, "agent {agent} jumps at t={t}"),
            Violation::Vertex { t, agents, cell } => {
                write!(
                    f,
                    "agents {} and {} both at {cell} at t={t}",
                    agents.0, agents.1
                )
            }
            Violation::Edge { t, agents } => {
                write!(f, "agents {} and {} swap at t={t}", agents.0, agents.1)
            }
        }
    }
}

/// Every way `paths` fails to be a collision-free solution of `instance`
/// under disappear-at-target semantics. Empty means valid.
pub fn check_solution(instance: &ProblemInstance, paths: &[Trajectory]) -> Vec<Violation> {
    let mut out = Vec::new();
    let tasks = instance.agents();
    if paths.len() != tasks.len() {
        out.push(Violation::AgentCount {
            expected: tasks.len(),
            found: paths.len(),
        });
        return out;
    }
    let map = instance.map();
    for (i, (path, task)) in paths.iter().zip(tasks).enumerate() {
        if path.agent != i {
            out.push(Violation::WrongAgentId {
                index: i,
                found: path.agent,
            });
        }
        if path.cells.first() != Some(&task.start) {
            out.push(Violation::WrongStart { agent: i });
        }
        if path.cells.last() != Some(&task.goal) {
            out.push(Violation::WrongGoal { agent: i });
        }
        for (t, &cell) in path.cells.iter().enumerate() {
            if !map.is_free(cell) {
                out.push(Violation::BlockedCell { agent: i, t, cell });
            }
            if t > 0 {
                let prev = path.cells[t - 1];
                if prev.row.abs_diff(cell.row) + prev.col.abs_diff(cell.col) > 1 {
                    out.push(Violation::IllegalStep { agent: i, t });
                }
            }
        }
    }
    for i in 0..paths.len() {
        for j in i + 1..paths.len() {
            let (a, b) = (&paths[i].cells, &paths[j].cells);
            let shared = a.len().min(b.len());
            for t in 0..shared {
                if a[t] == b[t] {
                    out.push(Violation::Vertex {
                        t,
                        agents: (i, j),
                        cell: a[t],
                    });
                }
                if t + 1 < shared && a[t] == b[t + 1] && a[t + 1] == b[t] && a[t] != a[t + 1] {
                    out.push(Violation::Edge { t, agents: (i, j) });
                }
            }
        }
    }
    out
}
