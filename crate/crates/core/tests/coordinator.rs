//! End-to-end behavior of the alert coordinator.

mod oracle;

use std::time::Duration;

use alertmapf_core::coordinator::{alert_is_minimal, apply_alert, issue_alert, AlertHistory};
use alertmapf_core::{
    detect_conflicts, generate_maze, resolve, sample_instance, AgentTask, AlertPayload,
    CoordinatorConfig, GridMap, PlannerKind, Position, ProblemInstance, SelectionPolicy,
    SolveStatus, Tier,
};
use oracle::JointCost;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

fn p(r: usize, c: usize) -> Position {
    Position::new(r, c)
}

fn head_on(map: GridMap, left: Position, right: Position, id: &str) -> ProblemInstance {
    ProblemInstance::new(
        map,
        vec![
            AgentTask {
                start: left,
                goal: right,
            },
            AgentTask {
                start: right,
                goal: left,
            },
        ],
        id,
    )
    .unwrap()
}

/// Random instance in the soundness range: 6x6 to 16x16, up to 45% blocked,
/// 2 to 12 agents.
fn medium_instance(seed: u64) -> Option<ProblemInstance> {
    let mut rng = oracle::rng(seed);
    let w = rng.random_range(6..=16);
    let h = rng.random_range(6..=16);
    let density = rng.random_range(0.0..=0.45);
    let map = oracle::random_map(&mut rng, w, h, density)?;
    let agents = rng.random_range(2..=12);
    oracle::random_instance(&mut rng, map, agents, &format!("medium-{seed}"))
}

/// Independent soundness check straight from the definitions.
fn assert_sound(
    inst: &ProblemInstance,
    paths: &[alertmapf_core::Trajectory],
) -> Result<(), TestCaseError> {
    prop_assert_eq!(paths.len(), inst.agent_count());
    for (i, traj) in paths.iter().enumerate() {
        prop_assert_eq!(traj.agent, i);
        prop_assert_eq!(traj.start(), inst.agents()[i].start);
        prop_assert_eq!(traj.end(), inst.agents()[i].goal);
        for w in traj.cells.windows(2) {
            prop_assert!(w[0] == w[1] || w[0].is_adjacent(w[1]));
        }
        prop_assert!(traj.cells.iter().all(|&c| inst.map().is_free(c)));
    }
    prop_assert!(oracle::pairwise_conflicts(paths).is_empty());
    Ok(())
}

fn config_variants() -> Vec<CoordinatorConfig> {
    let base = CoordinatorConfig {
        time_budget: Duration::from_secs(5),
        max_iterations: 500,
        ..CoordinatorConfig::default()
    };
    vec![
        base,
        CoordinatorConfig {
            planner: PlannerKind::weighted_astar(1.5),
            ..base
        },
        CoordinatorConfig {
            selection_policy: SelectionPolicy::Random { seed: 11 },
            escalation_threshold: Some(0),
            ..base
        },
        CoordinatorConfig {
            selection_policy: SelectionPolicy::Farthest,
            escalation_threshold: None,
            ..base
        },
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn solved_outcomes_are_sound_and_alerts_minimal(seed in any::<u64>()) {
        let Some(inst) = medium_instance(seed) else { return Ok(()) };
        for config in config_variants() {
            let out = resolve(&inst, &config);
            if out.status == SolveStatus::Solved {
                assert_sound(&inst, out.solution.as_ref().unwrap().as_slice())?;
            }
            prop_assert_eq!(out.metrics.collisions, out.alert_log.len());
            for alert in &out.alert_log {
                prop_assert!(alert_is_minimal(alert));
                match &alert.payload {
                    AlertPayload::Static(cells) => {
                        let source = alert.source_conflict.location.cells();
                        prop_assert!(cells.iter().all(|c| source.contains(c)));
                    }
                    AlertPayload::Dynamic(tracks) => {
                        for t in tracks {
                            prop_assert!(alert.source_conflict.agents.contains(&t.agent));
                            prop_assert_ne!(t.agent, alert.target_agent);
                        }
                    }
                }
                prop_assert!(alert.source_conflict.agents.contains(&alert.target_agent));
                match config.escalation_threshold {
                    None => prop_assert_eq!(alert.tier, Tier::Static),
                    Some(0) => prop_assert_eq!(alert.tier, Tier::Dynamic),
                    Some(_) => {}
                }
            }
        }
    }

    #[test]
    fn alerts_never_touch_the_past(seed in any::<u64>()) {
        let Some(inst) = medium_instance(seed) else { return Ok(()) };
        let config = CoordinatorConfig::default();
        let mut paths = resolve(&inst, &CoordinatorConfig { max_iterations: 0, ..config })
            .initial_paths
            .unwrap();
        let mut history = AlertHistory::default();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        for _ in 0..25 {
            let conflicts = detect_conflicts(&paths);
            let Some(conflict) = conflicts.first() else { break };
            let alert = issue_alert(conflict, &conflicts, &paths, &inst, &config, &history, &mut rng);
            let before = paths.get(alert.target_agent).clone();
            let result = apply_alert(&alert, &paths, &inst, &config.planner, &[]);
            history.record(&alert, result.is_ok());
            let Ok(after) = result else { continue };
            prop_assert_eq!(&after.cells[..=alert.rewind_time], &before.cells[..=alert.rewind_time]);
            prop_assert_eq!(after.end(), inst.agents()[alert.target_agent].goal);
            paths.replace(after);
        }
    }

    #[test]
    fn fixed_seed_reproduces_everything(seed in any::<u64>()) {
        let Some(inst) = medium_instance(seed) else { return Ok(()) };
        let config = CoordinatorConfig {
            selection_policy: SelectionPolicy::Random { seed },
            ..CoordinatorConfig::default()
        };
        let a = resolve(&inst, &config);
        let b = resolve(&inst, &config);
        prop_assert_eq!(a.status, b.status);
        prop_assert_eq!(a.alert_log, b.alert_log);
        prop_assert_eq!(a.final_paths, b.final_paths);
        prop_assert_eq!(a.stats.iterations, b.stats.iterations);
    }
}

#[test]
fn single_agent_needs_no_alerts() {
    let map = GridMap::open(5, 5).unwrap();
    let inst = ProblemInstance::new(
        map,
        vec![AgentTask {
            start: p(0, 0),
            goal: p(4, 4),
        }],
        "solo",
    )
    .unwrap();
    let out = resolve(&inst, &CoordinatorConfig::default());
    assert!(out.is_solved());
    assert!(out.alert_log.is_empty());
    assert_eq!(out.solution.unwrap().makespan(), 8);
}

#[test]
fn side_pocket_lets_agents_pass() {
    // The pocket sits one cell short of where the straight paths meet.
    let map = GridMap::from_ascii(&[".......", "@@.@@@@"]).unwrap();
    let inst = head_on(map, p(0, 0), p(0, 6), "pocket");
    assert!(oracle::joint_optimum(&inst, JointCost::Makespan).is_some());
    for config in config_variants() {
        let out = resolve(&inst, &config);
        if config.escalation_threshold.is_none() {
            // Forbidding the meeting cell cuts the corridor for both agents.
            assert_eq!(out.status, SolveStatus::Stalled);
            continue;
        }
        assert!(out.is_solved(), "{config:?}: {:?}", out.status);
        let sol = out.solution.unwrap();
        assert!(oracle::pairwise_conflicts(sol.as_slice()).is_empty());
        assert!(!out.alert_log.is_empty());
    }
}

#[test]
fn forced_swap_terminates_unsolved() {
    let map = GridMap::open(5, 1).unwrap();
    let inst = head_on(map, p(0, 0), p(0, 4), "corridor");
    assert_eq!(oracle::joint_optimum(&inst, JointCost::SumOfCosts), None);
    for config in config_variants() {
        let out = resolve(&inst, &config);
        assert!(
            matches!(out.status, SolveStatus::Stalled | SolveStatus::TimedOut),
            "{:?}",
            out.status
        );
        assert!(out.solution.is_none());
    }
    let tight = CoordinatorConfig {
        time_budget: Duration::ZERO,
        ..CoordinatorConfig::default()
    };
    assert_eq!(resolve(&inst, &tight).status, SolveStatus::TimedOut);
}

#[test]
fn maze_with_eight_agents() {
    for seed in 0..5 {
        let map = generate_maze(11, 11, 0.45, seed).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let inst = sample_instance(&map, 8, rng.random(), format!("maze-{seed}")).unwrap();
        let out = resolve(&inst, &CoordinatorConfig::default());
        assert!(out.is_solved(), "seed {seed}: {:?}", out.status);
        assert!(out.stats.wall_time < Duration::from_secs(50));
        let bound = inst
            .agents()
            .iter()
            .map(|a| oracle::single_agent_distance(&map, a.start, a.goal).unwrap())
            .max()
            .unwrap();
        assert!(out.metrics.makespan.unwrap() >= bound);
        assert!(oracle::pairwise_conflicts(out.solution.unwrap().as_slice()).is_empty());
    }
}

#[test]
fn dynamic_window_clears_a_crossing() {
    // Both agents reach the center of the plus at t=1; one dynamic alert
    // should make one of them wait a single step.
    let map = GridMap::from_ascii(&["@.@", "...", "@.@"]).unwrap();
    let inst = ProblemInstance::new(
        map,
        vec![
            AgentTask {
                start: p(1, 0),
                goal: p(1, 2),
            },
            AgentTask {
                start: p(0, 1),
                goal: p(2, 1),
            },
        ],
        "plus",
    )
    .unwrap();
    let config = CoordinatorConfig {
        escalation_threshold: Some(0),
        ..CoordinatorConfig::default()
    };
    let out = resolve(&inst, &config);
    assert!(out.is_solved());
    assert_eq!(out.alert_log.len(), 1);
    assert_eq!(out.alert_log[0].tier, Tier::Dynamic);
    assert_eq!(out.solution.unwrap().sum_of_costs(), 5);
}
