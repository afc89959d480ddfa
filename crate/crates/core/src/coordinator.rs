//! Centralized alert coordinator.
//!
//! Agents first plan independently with no knowledge of each other. The
//! coordinator then repeatedly takes the earliest conflict, picks one
//! involved agent, and sends it an alert: rewind to `max(0, t - r)` and
//! replan around either the conflict cells (static tier) or the other
//! involved agents' tracks over `[t - r, t + r]` (dynamic tier). The loop ends
//! when no conflicts remain, a budget runs out, or no involved agent can
//! replan.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::conflict::{conflict_count_per_agent, detect_conflicts, Conflict, ConflictLocation};
use crate::grid::Position;
use crate::instance::ProblemInstance;
use crate::metrics::{measure_run, RunMetrics};
use crate::outcome::{SolveOutcome, SolveStats, SolveStatus, SolverFamily};
use crate::planner::{
    plan, replan_dynamic, replan_static, ConstraintSet, PlanError, PlannerKind, Segment, Track,
};
use crate::trajectory::TrajectorySet;

/// How the coordinator picks which conflicting agent replans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum SelectionPolicy {
    /// Uniform over the involved agents, from a seeded stream.
    Random { seed: u64 },
    /// Largest Manhattan distance to goal at the rewind time.
    Farthest,
    /// Fewest conflicts across the whole current conflict set.
    Ffc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    Static,
    Dynamic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlertPayload {
    /// Conflict cells to avoid from the rewind time on.
    Static(Vec<Position>),
    /// Other involved agents' tracks to avoid as timed obstacles.
    Dynamic(Vec<Track>),
}

/// A targeted replanning request to one agent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlertMessage {
    pub target_agent: usize,
    pub rewind_time: usize,
    pub tier: Tier,
    pub payload: AlertPayload,
    pub source_conflict: Conflict,
}

impl AlertMessage {
    /// Information units carried: 1 for a static alert, one per track
    /// `(cell, t)` entry for a dynamic alert.
    pub fn info_units(&self) -> usize {
        match &self.payload {
            AlertPayload::Static(_) => 1,
            AlertPayload::Dynamic(tracks) => tracks.iter().map(|t| t.cells.len()).sum(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoordinatorConfig {
    pub selection_policy: SelectionPolicy,
    /// Rewind window `r`.
    pub rewind_r: usize,
    pub planner: PlannerKind,
    /// Static alerts a conflict signature may receive before later
    /// recurrences go straight to the dynamic tier. `Some(0)` is dynamic-only;
    /// `None` is static-only (no escalation at all).
    pub escalation_threshold: Option<u32>,
    pub max_iterations: usize,
    pub time_budget: Duration,
    /// When a signature recurs after an applied alert at the last tier it
    /// can reach, the next-ranked agent is alerted first.
    pub rotate_on_recurrence: bool,
    /// Agents keep avoiding tracks from their earlier dynamic alerts.
    pub remember_tracks: bool,
}

impl Default for CoordinatorConfig {
    fn default() -> Self {
        Self {
            selection_policy: SelectionPolicy::Ffc,
            rewind_r: 2,
            planner: PlannerKind::bfs(),
            escalation_threshold: Some(1),
            max_iterations: 2000,
            time_budget: Duration::from_secs(50),
            rotate_on_recurrence: true,
            remember_tracks: true,
        }
    }
}

/// Recurrence identity of a conflict: its cells (edge cells unordered) and agents.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConflictSignature {
    cells: Vec<Position>,
    agents: Vec<usize>,
}

impl ConflictSignature {
    pub fn of(conflict: &Conflict) -> Self {
        let mut cells = conflict.location.cells();
        cells.sort_unstable();
        Self {
            cells,
            agents: conflict.agents.clone(),
        }
    }
}

/// Per-signature alert history driving tier escalation and reselection.
#[derive(Debug, Clone, Default)]
pub struct AlertHistory {
    issued: HashMap<(ConflictSignature, Tier), u32>,
    accepted: HashMap<(ConflictSignature, Tier), u32>,
}

impl AlertHistory {
    /// Alerts of `tier` issued for `sig`, including failed replans.
    pub fn issued(&self, sig: &ConflictSignature, tier: Tier) -> u32 {
        self.issued.get(&(sig.clone(), tier)).copied().unwrap_or(0)
    }

    /// Alerts of `tier` for `sig` whose replan was applied.
    pub fn accepted(&self, sig: &ConflictSignature, tier: Tier) -> u32 {
        self.accepted
            .get(&(sig.clone(), tier))
            .copied()
            .unwrap_or(0)
    }

    pub fn record(&mut self, alert: &AlertMessage, accepted: bool) {
        let key = (ConflictSignature::of(&alert.source_conflict), alert.tier);
        if accepted {
            *self.accepted.entry(key.clone()).or_default() += 1;
        }
        *self.issued.entry(key).or_default() += 1;
    }
}

/// `max(0, t - r)`.
pub fn rewind_time(conflict: &Conflict, r: usize) -> usize {
    conflict.time.saturating_sub(r)
}

/// Involved agents in preference order for `policy`; ties go to the smaller id.
/// For `Random` the order is a uniform shuffle drawn from `rng`.
pub fn rank_agents(
    conflict: &Conflict,
    all_conflicts: &[Conflict],
    paths: &TrajectorySet,
    instance: &ProblemInstance,
    policy: SelectionPolicy,
    rewind: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<usize> {
    let mut agents = conflict.agents.clone();
    match policy {
        SelectionPolicy::Random { .. } => agents.shuffle(rng),
        SelectionPolicy::Farthest => {
            let distance = |a: usize| {
                paths
                    .get(a)
                    .position_at(rewind)
                    .map_or(0, |p| p.manhattan(instance.agents()[a].goal))
            };
            agents.sort_by_key(|&a| (std::cmp::Reverse(distance(a)), a));
        }
        SelectionPolicy::Ffc => {
            agents.sort_by_key(|&a| (conflict_count_per_agent(all_conflicts, a), a));
        }
    }
    agents
}

/// The agent `policy` alerts first for `conflict`.
pub fn select_agent(
    conflict: &Conflict,
    all_conflicts: &[Conflict],
    paths: &TrajectorySet,
    instance: &ProblemInstance,
    policy: SelectionPolicy,
    rewind: usize,
    rng: &mut ChaCha8Rng,
) -> usize {
    rank_agents(
        conflict,
        all_conflicts,
        paths,
        instance,
        policy,
        rewind,
        rng,
    )[0]
}

/// Tier for a first attempt on `conflict` given what it has already received.
pub fn initial_tier(conflict: &Conflict, history: &AlertHistory, threshold: Option<u32>) -> Tier {
    match threshold {
        None => Tier::Static,
        Some(limit) if history.issued(&ConflictSignature::of(conflict), Tier::Static) >= limit => {
            Tier::Dynamic
        }
        Some(_) => Tier::Static,
    }
}

/// Builds the alert for `target` at `tier`. Static payloads are the conflict
/// cells; dynamic payloads are the other involved agents' paths clipped to
/// `[rewind, t + r]` and to their lifetimes.
pub fn build_alert(
    conflict: &Conflict,
    target: usize,
    tier: Tier,
    paths: &TrajectorySet,
    r: usize,
) -> AlertMessage {
    let rewind = rewind_time(conflict, r);
    let payload = match tier {
        Tier::Static => AlertPayload::Static(conflict.location.cells()),
        Tier::Dynamic => AlertPayload::Dynamic(
            conflict
                .agents
                .iter()
                .filter(|&&a| a != target)
                .filter_map(|&a| Track::clip(paths.get(a), rewind, conflict.time + r))
                .collect(),
        ),
    };
    AlertMessage {
        target_agent: target,
        rewind_time: rewind,
        tier,
        payload,
        source_conflict: conflict.clone(),
    }
}

/// First alert for `conflict`: the policy's preferred agent at the tier the
/// signature's history calls for.
pub fn issue_alert(
    conflict: &Conflict,
    all_conflicts: &[Conflict],
    paths: &TrajectorySet,
    instance: &ProblemInstance,
    config: &CoordinatorConfig,
    history: &AlertHistory,
    rng: &mut ChaCha8Rng,
) -> AlertMessage {
    let rewind = rewind_time(conflict, config.rewind_r);
    let target = select_agent(
        conflict,
        all_conflicts,
        paths,
        instance,
        config.selection_policy,
        rewind,
        rng,
    );
    let tier = initial_tier(conflict, history, config.escalation_threshold);
    build_alert(conflict, target, tier, paths, config.rewind_r)
}

/// Carries out an alert on the target's path: replans from its rewind
/// position and returns the spliced trajectory. Timesteps before the rewind
/// time are untouched.
///
/// `remembered` holds tracks the agent received in earlier dynamic alerts; a
/// dynamic replan avoids them too, falling back to the payload alone if that
/// is infeasible.
pub fn apply_alert(
    alert: &AlertMessage,
    paths: &TrajectorySet,
    instance: &ProblemInstance,
    planner: &PlannerKind,
    remembered: &[Track],
) -> Result<crate::trajectory::Trajectory, PlanError> {
    let agent = alert.target_agent;
    let current = paths.get(agent);
    let state = (
        current
            .position_at(alert.rewind_time)
            .expect("alerted agent is alive at the rewind time"),
        alert.rewind_time,
    );
    let goal = instance.agents()[agent].goal;
    let segment = match &alert.payload {
        AlertPayload::Static(cells) => replan_static(instance.map(), state, goal, cells, planner)?,
        AlertPayload::Dynamic(tracks) => {
            let mut all: Vec<Track> = remembered
                .iter()
                .filter(|t| t.end_time() >= alert.rewind_time)
                .cloned()
                .collect();
            if all.is_empty() {
                replan_dynamic(instance.map(), state, goal, tracks, planner)?
            } else {
                all.extend(tracks.iter().cloned());
                replan_dynamic(instance.map(), state, goal, &all, planner)
                    .or_else(|_| replan_dynamic(instance.map(), state, goal, tracks, planner))?
            }
        }
    };
    // The segment starts at the rewind cell, so the prefix keeps it and concat elides the overlap.
    let prefix = current
        .truncate(alert.rewind_time)
        .expect("rewind within lifetime");
    Ok(prefix
        .concat(&segment.into_trajectory(agent))
        .expect("segment starts at the prefix's last cell"))
}

/// Runs the plan / detect / alert / replan loop on `instance`.
pub fn resolve(instance: &ProblemInstance, config: &CoordinatorConfig) -> SolveOutcome {
    let started = Instant::now();
    let seed = match config.selection_policy {
        SelectionPolicy::Random { seed } => seed,
        _ => 0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut alert_log = Vec::new();
    let mut history = AlertHistory::default();
    let mut iterations = 0;
    let mut memory: Vec<Vec<Track>> = vec![Vec::new(); instance.agent_count()];

    let finish = |status: SolveStatus,
                  initial: Option<TrajectorySet>,
                  current: Option<TrajectorySet>,
                  alert_log: Vec<AlertMessage>,
                  iterations: usize| {
        let mut outcome = SolveOutcome {
            solver: SolverFamily::Alert,
            status,
            solution: (status == SolveStatus::Solved)
                .then(|| current.clone())
                .flatten(),
            initial_paths: initial,
            final_paths: current,
            alert_log,
            stats: SolveStats {
                iterations,
                wall_time: started.elapsed(),
                ..SolveStats::default()
            },
            metrics: RunMetrics::default(),
        };
        outcome.metrics = measure_run(&outcome, instance);
        outcome
    };

    // Independent planning: no information about other agents.
    let mut initial = Vec::with_capacity(instance.agent_count());
    for (agent, task) in instance.agents().iter().enumerate() {
        match plan(
            instance.map(),
            task.start,
            task.goal,
            0,
            &ConstraintSet::new(),
            &config.planner,
        ) {
            Ok(seg) => initial.push(Segment::into_trajectory(seg, agent)),
            Err(_) => return finish(SolveStatus::Stalled, None, None, alert_log, iterations),
        }
    }
    let initial = TrajectorySet::new(initial);
    let mut paths = initial.clone();

    loop {
        if started.elapsed() >= config.time_budget {
            return finish(
                SolveStatus::TimedOut,
                Some(initial),
                Some(paths),
                alert_log,
                iterations,
            );
        }
        let conflicts = detect_conflicts(&paths);
        let Some(conflict) = conflicts.first() else {
            return finish(
                SolveStatus::Solved,
                Some(initial),
                Some(paths),
                alert_log,
                iterations,
            );
        };
        if iterations == config.max_iterations {
            return finish(
                SolveStatus::Stalled,
                Some(initial),
                Some(paths),
                alert_log,
                iterations,
            );
        }
        iterations += 1;

        let signature = ConflictSignature::of(conflict);
        let rewind = rewind_time(conflict, config.rewind_r);
        let mut candidates = rank_agents(
            conflict,
            &conflicts,
            &paths,
            instance,
            config.selection_policy,
            rewind,
            &mut rng,
        );
        if config.rotate_on_recurrence {
            let last_tier = if config.escalation_threshold.is_none() {
                Tier::Static
            } else {
                Tier::Dynamic
            };
            let shift = history.accepted(&signature, last_tier) as usize % candidates.len();
            candidates.rotate_left(shift);
        }
        let first_tier = initial_tier(conflict, &history, config.escalation_threshold);
        let tiers: &[Tier] = match (first_tier, config.escalation_threshold) {
            (Tier::Dynamic, _) => &[Tier::Dynamic],
            (Tier::Static, None) => &[Tier::Static],
            (Tier::Static, Some(_)) => &[Tier::Static, Tier::Dynamic],
        };

        let mut replanned = None;
        'agents: for &agent in &candidates {
            for &tier in tiers {
                let alert = build_alert(conflict, agent, tier, &paths, config.rewind_r);
                let result = apply_alert(&alert, &paths, instance, &config.planner, &memory[agent]);
                history.record(&alert, result.is_ok());
                if config.remember_tracks {
                    if let (Ok(_), AlertPayload::Dynamic(tracks)) = (&result, &alert.payload) {
                        memory[agent].extend(tracks.iter().cloned());
                    }
                }
                alert_log.push(alert);
                if let Ok(traj) = result {
                    replanned = Some(traj);
                    break 'agents;
                }
                if started.elapsed() >= config.time_budget {
                    return finish(
                        SolveStatus::TimedOut,
                        Some(initial),
                        Some(paths),
                        alert_log,
                        iterations,
                    );
                }
            }
        }
        match replanned {
            Some(traj) => paths.replace(traj),
            // Every involved agent failed every allowed tier on this conflict.
            None => {
                return finish(
                    SolveStatus::Stalled,
                    Some(initial),
                    Some(paths),
                    alert_log,
                    iterations,
                )
            }
        }
    }
}

/// True when `alert`'s payload only references the cells and agents of its
/// source conflict.
pub fn alert_is_minimal(alert: &AlertMessage) -> bool {
    let conflict = &alert.source_conflict;
    match &alert.payload {
        AlertPayload::Static(cells) => {
            let allowed = conflict.location.cells();
            cells.iter().all(|c| allowed.contains(c))
                && match conflict.location {
                    ConflictLocation::Vertex(_) => cells.len() == 1,
                    ConflictLocation::Edge { .. } => cells.len() == 2,
                }
        }
        AlertPayload::Dynamic(tracks) => tracks
            .iter()
            .all(|t| t.agent != alert.target_agent && conflict.involves(t.agent)),
    }
}
