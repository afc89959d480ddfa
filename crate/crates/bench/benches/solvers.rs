use std::hint::black_box;
use std::time::Duration;

use alertmapf_bench::{independent_paths, maze_instance, open_instance};
use alertmapf_core::{
    cbs_solve, detect_conflicts, plan, resolve, CbsConfig, ConstraintSet, CoordinatorConfig,
    Objective, PlannerKind,
};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn detection(c: &mut Criterion) {
    let mut group = c.benchmark_group("detect_conflicts");
    for agents in [8, 32, 128] {
        let set = independent_paths(&open_instance(32, agents, 7));
        group.bench_with_input(BenchmarkId::from_parameter(agents), &set, |b, set| {
            b.iter(|| detect_conflicts(black_box(set)))
        });
    }
    group.finish();
}

fn planner(c: &mut Criterion) {
    let inst = maze_instance(32, 0.3, 1, 11);
    let task = inst.agents()[0];
    let mut group = c.benchmark_group("plan");
    for (name, kind) in [
        ("bfs", PlannerKind::bfs()),
        ("astar-1.5", PlannerKind::weighted_astar(1.5)),
    ] {
        group.bench_function(name, |b| {
            b.iter(|| {
                plan(
                    inst.map(),
                    task.start,
                    task.goal,
                    0,
                    &ConstraintSet::new(),
                    black_box(&kind),
                )
            })
        });
    }
    group.finish();
}

fn coordinator(c: &mut Criterion) {
    let mut group = c.benchmark_group("resolve");
    let config = CoordinatorConfig {
        time_budget: Duration::from_secs(10),
        ..CoordinatorConfig::default()
    };
    for agents in [5, 10] {
        let inst = maze_instance(11, 0.45, agents, 2024);
        group.bench_with_input(BenchmarkId::from_parameter(agents), &inst, |b, inst| {
            b.iter(|| resolve(black_box(inst), &config))
        });
    }
    group.finish();
}

fn cbs(c: &mut Criterion) {
    let inst = open_instance(8, 4, 3);
    let mut group = c.benchmark_group("cbs");
    for objective in [Objective::SumOfCosts, Objective::Makespan] {
        let config = CbsConfig {
            objective,
            time_budget: Duration::from_secs(10),
            max_nodes: Some(20_000),
        };
        group.bench_function(format!("{objective:?}"), |b| {
            b.iter(|| cbs_solve(black_box(&inst), &config))
        });
    }
    group.finish();
}

criterion_group!(benches, detection, planner, coordinator, cbs);
criterion_main!(benches);
