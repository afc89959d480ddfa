//! Fixed, seeded workloads shared by the benchmarks.

use alertmapf_core::{
    generate_maze, plan, sample_instance, ConstraintSet, GridMap, PlannerKind, ProblemInstance,
    TrajectorySet,
};

/// A generated maze with `agents` sampled tasks. Panics if the fixture cannot be built.
pub fn maze_instance(side: usize, density: f64, agents: usize, seed: u64) -> ProblemInstance {
    let map = generate_maze(side, side, density, seed).expect("maze fixture");
    sample_instance(&map, agents, seed, format!("maze{side}-n{agents}")).expect("instance fixture")
}

/// Sampled tasks on an open `side x side` grid.
pub fn open_instance(side: usize, agents: usize, seed: u64) -> ProblemInstance {
    let map = GridMap::open(side, side).expect("open grid");
    sample_instance(&map, agents, seed, format!("open{side}-n{agents}")).expect("instance fixture")
}

/// Every agent's unconstrained shortest path. Crowded instances give sets
/// with many conflicts, which is what the detector benchmarks want.
pub fn independent_paths(instance: &ProblemInstance) -> TrajectorySet {
    let planner = PlannerKind::bfs();
    let paths = instance
        .agents()
        .iter()
        .enumerate()
        .map(|(agent, task)| {
            plan(
                instance.map(),
                task.start,
                task.goal,
                0,
                &ConstraintSet::new(),
                &planner,
            )
            .expect("sampled tasks are connected")
            .into_trajectory(agent)
        })
        .collect();
    TrajectorySet::new(paths)
}
