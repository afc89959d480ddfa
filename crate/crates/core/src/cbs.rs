//! Conflict-Based Search baseline.
//!
//! Best-first search over a constraint tree. Each node adds one constraint
//! for one agent to its parent and replans only that agent with space-time
//! A*. Nodes are ordered by (cost, conflict count, creation order), and the
//! first popped node without conflicts is returned.
//!
//! A* fixes the replanned agent's best arrival under its constraints. Among
//! paths that keep the node cost unchanged (that arrival for sum of costs,
//! the larger of it and the others' makespan for makespan), the one with the
//! fewest conflicts against the other agents is kept. Node costs are the same
//! as with any other shortest path, so optimality is unaffected.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::rc::Rc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::conflict::{detect_conflicts_in, Conflict, ConflictLocation};
use crate::grid::{GridMap, Position};
use crate::instance::ProblemInstance;
use crate::metrics::{measure_run, RunMetrics};
use crate::outcome::{SolveOutcome, SolveStats, SolveStatus, SolverFamily};
use crate::planner::{plan, ConstraintSet, PlannerKind};
use crate::trajectory::{Trajectory, TrajectorySet};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    #[default]
    SumOfCosts,
    Makespan,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CbsConfig {
    pub objective: Objective,
    pub time_budget: Duration,
    /// Cap on high-level expansions.
    pub max_nodes: Option<usize>,
}

impl Default for CbsConfig {
    fn default() -> Self {
        Self {
            objective: Objective::SumOfCosts,
            time_budget: Duration::from_secs(50),
            max_nodes: None,
        }
    }
}

/// One branching constraint for one agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CbsConstraint {
    Vertex {
        cell: Position,
        t: usize,
    },
    /// Moving `from -> to` departing at `t`.
    Edge {
        from: Position,
        to: Position,
        t: usize,
    },
}

struct CtNode {
    parent: Option<usize>,
    /// Constraint added relative to the parent, absent at the root.
    added: Option<(usize, CbsConstraint)>,
    paths: Vec<Rc<Trajectory>>,
    cost: usize,
    conflicts: Vec<Conflict>,
}

/// The two children of a conflict: `(agent, constraint)` pairs.
pub fn branch(conflict: &Conflict) -> [(usize, CbsConstraint); 2] {
    let (a, b) = (conflict.agents[0], conflict.agents[1]);
    let t = conflict.time;
    match conflict.location {
        ConflictLocation::Vertex(cell) => [
            (a, CbsConstraint::Vertex { cell, t }),
            (b, CbsConstraint::Vertex { cell, t }),
        ],
        ConflictLocation::Edge { from, to } => [
            (a, CbsConstraint::Edge { from, to, t }),
            (
                b,
                CbsConstraint::Edge {
                    from: to,
                    to: from,
                    t,
                },
            ),
        ],
    }
}

fn cost(paths: &[Rc<Trajectory>], objective: Objective) -> usize {
    let spans = paths.iter().map(|p| p.makespan());
    match objective {
        Objective::SumOfCosts => spans.sum(),
        Objective::Makespan => spans.max().unwrap_or(0),
    }
}

/// A path from `start` to `goal` arriving no later than `deadline` that
/// honors `constraints` and has the fewest conflicts with `others`, earliest
/// arrival among those. `None` if no path arrives in time.
fn least_conflict_path(
    map: &GridMap,
    start: Position,
    goal: Position,
    constraints: &ConstraintSet,
    deadline: usize,
    others: &[&Trajectory],
) -> Option<Vec<Position>> {
    let mut occupied: HashMap<(Position, usize), u32> = HashMap::new();
    let mut moves: HashMap<(Position, Position, usize), u32> = HashMap::new();
    for other in others {
        for (t, &c) in other.cells.iter().enumerate() {
            *occupied.entry((c, t)).or_default() += 1;
            if let Some(&next) = other.cells.get(t + 1) {
                if next != c {
                    *moves.entry((c, next, t)).or_default() += 1;
                }
            }
        }
    }

    // layers[t][cell] = (conflicts so far, cell index at t - 1)
    let cells = map.cell_count();
    let mut layers: Vec<Vec<Option<(u32, usize)>>> = vec![vec![None; cells]];
    if !constraints.cell_allowed(start, 0) {
        return None;
    }
    layers[0][map.index(start)] = Some((0, usize::MAX));
    let mut best: Option<(u32, usize)> = None;
    for t in 0..=deadline {
        if let Some((k, _)) = layers[t][map.index(goal)] {
            if best.is_none_or(|(b, _)| k < b) {
                best = Some((k, t));
            }
        }
        if t == deadline {
            break;
        }
        let mut next = vec![None; cells];
        for (i, slot) in layers[t].iter().enumerate() {
            let Some((k, _)) = *slot else { continue };
            let here = map.position(i);
            for to in map.neighbor_iter(here).chain(std::iter::once(here)) {
                if !constraints.cell_allowed(to, t + 1)
                    || (to != here && !constraints.edge_allowed(here, to, t))
                {
                    continue;
                }
                let mut cost = k + occupied.get(&(to, t + 1)).copied().unwrap_or(0);
                if to != here {
                    cost += moves.get(&(to, here, t)).copied().unwrap_or(0);
                }
                let j = map.index(to);
                if next[j].is_none_or(|(old, _)| cost < old) {
                    next[j] = Some((cost, i));
                }
            }
        }
        layers.push(next);
    }

    let (_, arrival) = best?;
    let mut path = Vec::with_capacity(arrival + 1);
    let mut i = map.index(goal);
    for t in (0..=arrival).rev() {
        path.push(map.position(i));
        i = layers[t][i].expect("reached states are filled").1;
    }
    path.reverse();
    Some(path)
}

fn conflicts_of(paths: &[Rc<Trajectory>]) -> Vec<Conflict> {
    let refs: Vec<&Trajectory> = paths.iter().map(Rc::as_ref).collect();
    detect_conflicts_in(&refs).0
}

fn constraints_for(arena: &[CtNode], mut node: usize, agent: usize) -> ConstraintSet {
    let mut set = ConstraintSet::new();
    loop {
        let n = &arena[node];
        if let Some((a, c)) = n.added {
            if a == agent {
                match c {
                    CbsConstraint::Vertex { cell, t } => set.forbid_cell_at(cell, t),
                    CbsConstraint::Edge { from, to, t } => set.forbid_edge(from, to, t),
                }
            }
        }
        match n.parent {
            Some(p) => node = p,
            None => return set,
        }
    }
}

/// Solves `instance` optimally for `config.objective`, or reports why not.
pub fn cbs_solve(instance: &ProblemInstance, config: &CbsConfig) -> SolveOutcome {
    let started = Instant::now();
    let low_level = PlannerKind::weighted_astar(1.0);
    let mut stats = SolveStats::default();

    let finish = |status: SolveStatus,
                  root: Option<TrajectorySet>,
                  last: Option<TrajectorySet>,
                  mut stats: SolveStats| {
        stats.wall_time = started.elapsed();
        let mut outcome = SolveOutcome {
            solver: SolverFamily::Cbs,
            status,
            solution: (status == SolveStatus::Solved)
                .then(|| last.clone())
                .flatten(),
            initial_paths: root,
            final_paths: last,
            alert_log: Vec::new(),
            stats,
            metrics: RunMetrics::default(),
        };
        outcome.metrics = measure_run(&outcome, instance);
        outcome
    };
    let to_set = |paths: &[Rc<Trajectory>]| {
        TrajectorySet::new(paths.iter().map(|p| p.as_ref().clone()).collect())
    };

    let mut root_paths = Vec::with_capacity(instance.agent_count());
    for (agent, task) in instance.agents().iter().enumerate() {
        match plan(
            instance.map(),
            task.start,
            task.goal,
            0,
            &ConstraintSet::new(),
            &low_level,
        ) {
            Ok(seg) => root_paths.push(Rc::new(seg.into_trajectory(agent))),
            Err(_) => return finish(SolveStatus::Stalled, None, None, stats),
        }
    }
    let root_set = to_set(&root_paths);
    let root_conflicts = conflicts_of(&root_paths);
    stats.nodes_generated = 1;
    stats.conflicts_inspected = root_conflicts.len();
    let mut arena = vec![CtNode {
        parent: None,
        added: None,
        cost: cost(&root_paths, config.objective),
        paths: root_paths,
        conflicts: root_conflicts,
    }];
    let mut open = BinaryHeap::from([Reverse((arena[0].cost, arena[0].conflicts.len(), 0usize))]);

    while let Some(Reverse((_, _, id))) = open.pop() {
        if started.elapsed() >= config.time_budget {
            let last = to_set(&arena[id].paths);
            return finish(SolveStatus::TimedOut, Some(root_set), Some(last), stats);
        }
        let Some(conflict) = arena[id].conflicts.first().cloned() else {
            let last = to_set(&arena[id].paths);
            return finish(SolveStatus::Solved, Some(root_set), Some(last), stats);
        };
        if config.max_nodes.is_some_and(|m| stats.iterations >= m) {
            let last = to_set(&arena[id].paths);
            return finish(SolveStatus::Stalled, Some(root_set), Some(last), stats);
        }
        stats.iterations += 1;

        for (agent, constraint) in branch(&conflict) {
            let child = arena.len();
            arena.push(CtNode {
                parent: Some(id),
                added: Some((agent, constraint)),
                paths: Vec::new(),
                cost: 0,
                conflicts: Vec::new(),
            });
            let constraints = constraints_for(&arena, child, agent);
            let task = instance.agents()[agent];
            let Ok(seg) = plan(
                instance.map(),
                task.start,
                task.goal,
                0,
                &constraints,
                &low_level,
            ) else {
                arena.pop();
                continue;
            };
            let mut paths = arena[id].paths.clone();
            let others: Vec<&Trajectory> = paths
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != agent)
                .map(|(_, p)| p.as_ref())
                .collect();
            let deadline = match config.objective {
                Objective::SumOfCosts => seg.end_time(),
                Objective::Makespan => others
                    .iter()
                    .map(|p| p.makespan())
                    .max()
                    .unwrap_or(0)
                    .max(seg.end_time()),
            };
            let cells = least_conflict_path(
                instance.map(),
                task.start,
                task.goal,
                &constraints,
                deadline,
                &others,
            )
            .unwrap_or(seg.cells);
            paths[agent] = Rc::new(Trajectory::new(agent, cells).expect("paths are non-empty"));
            let conflicts = conflicts_of(&paths);
            stats.nodes_generated += 1;
            stats.conflicts_inspected += conflicts.len();
            let node = &mut arena[child];
            node.cost = cost(&paths, config.objective);
            node.paths = paths;
            node.conflicts = conflicts;
            open.push(Reverse((node.cost, node.conflicts.len(), child)));
        }
        // Expanded nodes only serve as constraint-chain links from here on.
        arena[id].paths = Vec::new();
        arena[id].conflicts = Vec::new();
    }
    finish(SolveStatus::Stalled, Some(root_set), None, stats)
}
