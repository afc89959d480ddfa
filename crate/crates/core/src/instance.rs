//! Problem instances and their JSON file form.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{GridMap, Position};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AgentTask {
    pub start: Position,
    pub goal: Position,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InstanceError {
    #[error("agent {agent}: {which} {cell} is not a free cell")]
    NotFree {
        agent: usize,
        which: &'static str,
        cell: Position,
    },
    #[error("agents {first} and {second} share {which} {cell}")]
    Duplicate {
        first: usize,
        second: usize,
        which: &'static str,
        cell: Position,
    },
    #[error("requested {requested} agents but only {available} cells are available")]
    NotEnoughCells { requested: usize, available: usize },
}

/// A map plus an ordered list of agent tasks. Agent ids are list indices.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    map: GridMap,
    agents: Vec<AgentTask>,
    id: String,
}

impl ProblemInstance {
    /// Validates that starts and goals are free and pairwise distinct.
    pub fn new(
        map: GridMap,
        agents: Vec<AgentTask>,
        id: impl Into<String>,
    ) -> Result<Self, InstanceError> {
        for (which, pick) in [
            (
                "start",
                (|t: &AgentTask| t.start) as fn(&AgentTask) -> Position,
            ),
            ("goal", |t: &AgentTask| t.goal),
        ] {
            let mut seen: Vec<(Position, usize)> = Vec::with_capacity(agents.len());
            for (agent, task) in agents.iter().enumerate() {
                let cell = pick(task);
                if !map.is_free(cell) {
                    return Err(InstanceError::NotFree { agent, which, cell });
                }
                if let Some(&(_, first)) = seen.iter().find(|(c, _)| *c == cell) {
                    return Err(InstanceError::Duplicate {
                        first,
                        second: agent,
                        which,
                        cell,
                    });
                }
                seen.push((cell, agent));
            }
        }
        Ok(Self {
            map,
            agents,
            id: id.into(),
        })
    }

    pub fn map(&self) -> &GridMap {
        &self.map
    }

    pub fn agents(&self) -> &[AgentTask] {
        &self.agents
    }

    pub fn agent_count(&self) -> usize {
        self.agents.len()
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    /// Largest single-agent shortest-path distance; a lower bound on makespan.
    pub fn makespan_lower_bound(&self) -> Option<usize> {
        self.agents
            .iter()
            .map(|a| self.map.shortest_distance(a.start, a.goal))
            .try_fold(0, |acc, d| d.map(|d| acc.max(d)))
    }
}

/// Samples `agents` tasks uniformly from the largest free component: distinct
/// starts, distinct goals, and no agent starting on its own goal.
pub fn sample_instance(
    map: &GridMap,
    agents: usize,
    seed: u64,
    id: impl Into<String>,
) -> Result<ProblemInstance, InstanceError> {
    let cells = map.largest_component();
    if agents > cells.len() || (agents > 0 && cells.len() < 2) {
        return Err(InstanceError::NotEnoughCells {
            requested: agents,
            available: cells.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts = cells.clone();
    starts.shuffle(&mut rng);
    starts.truncate(agents);
    let mut goal_pool = cells;
    goal_pool.shuffle(&mut rng);

    let mut used = HashSet::new();
    let mut tasks = Vec::with_capacity(agents);
    for &start in &starts {
        let goal = goal_pool
            .iter()
            .copied()
            .find(|g| *g != start && !used.contains(g))
            .or_else(|| goal_pool.iter().copied().find(|g| !used.contains(g)))
            .expect("pool holds at least as many cells as agents");
        used.insert(goal);
        tasks.push(AgentTask { start, goal });
    }
    ProblemInstance::new(map.clone(), tasks, id)
}

/// On-disk instance description; the map lives in a sibling `.map` file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub map: String,
    pub agents: Vec<AgentTask>,
    pub seed: u64,
}
