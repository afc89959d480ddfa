//! The four subcommands as library functions.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use alertmapf_core::metrics::{info_load_alert, info_load_distributed, info_load_reduction};
use alertmapf_core::movingai::{parse_map, write_map};
use alertmapf_core::{
    aggregate, cbs_solve, generate_maze, generate_warehouse, resolve, sample_instance, GridMap,
    InfoLoadParams, InstanceFile, ProblemInstance, SolveOutcome, SolveStatus,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{
    derive_seed, hash_json, ExperimentConfig, MapSpec, SolverName, SolverSettings, SEED_INSTANCE,
    SEED_MAP, SEED_POLICY,
};
use crate::error::CliError;
use crate::output::{
    alert_log_jsonl, collisions_definition, to_csv, write_atomic, write_json, AggregateRow, RunRow,
    SolutionFile, AGGREGATE_HEADER, RUNS_HEADER,
};

/// Runs one solver on one instance.
pub fn run_solver(
    instance: &ProblemInstance,
    solver: SolverName,
    settings: &SolverSettings,
    policy_seed: u64,
) -> SolveOutcome {
    match solver {
        SolverName::AlertBfs | SolverName::AlertAstar => {
            resolve(instance, &settings.coordinator_config(solver, policy_seed))
        }
        SolverName::Cbs => cbs_solve(instance, &settings.cbs_config()),
    }
}

/// One planned instance of an experiment grid.
#[derive(Debug, Clone)]
pub struct PlannedInstance {
    pub id: String,
    pub map_name: String,
    pub agents: usize,
    pub index: usize,
    pub seed: u64,
    pub instance: Result<ProblemInstance, String>,
}

/// Maps of an experiment, one per instance index for generated sources.
pub fn experiment_maps(config: &ExperimentConfig) -> Result<Vec<(String, GridMap)>, CliError> {
    let label = config.map.label();
    match &config.map {
        MapSpec::File { path } => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            let map = parse_map(&text).map_err(|e| CliError::parse(path, e))?;
            Ok(vec![(label, map)])
        }
        spec => (0..config.instances)
            .map(|i| {
                let seed = derive_seed(config.seed, SEED_MAP, 0, i);
                let map = match *spec {
                    MapSpec::Maze {
                        width,
                        height,
                        density,
                    } => generate_maze(width, height, density, seed)?,
                    MapSpec::Warehouse { width, height } => {
                        generate_warehouse(width, height, seed)?
                    }
                    MapSpec::File { .. } => unreachable!(),
                };
                Ok((format!("{label}-i{i}"), map))
            })
            .collect(),
    }
}

/// Every `(agent count, instance index)` of the grid, in config order.
pub fn plan_instances(
    config: &ExperimentConfig,
    maps: &[(String, GridMap)],
) -> Vec<PlannedInstance> {
    let label = config.map.label();
    let mut out = Vec::new();
    for &n in &config.agents {
        for i in 0..config.instances {
            let (map_name, map) = &maps[if config.map.is_generated() { i } else { 0 }];
            let id = format!("{label}-n{n}-i{i}");
            let seed = derive_seed(config.seed, SEED_INSTANCE, n, i);
            out.push(PlannedInstance {
                instance: sample_instance(map, n, seed, id.clone()).map_err(|e| e.to_string()),
                id,
                map_name: map_name.clone(),
                agents: n,
                index: i,
                seed,
            });
        }
    }
    out
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    command: &'a str,
    config_hash: String,
    seed: u64,
    config: &'a ExperimentConfig,
    collisions_counts: BTreeMap<&'static str, &'static str>,
    artifacts: Vec<String>,
    failures: Vec<String>,
}

fn rel(out: &Path, path: &Path) -> String {
    path.strip_prefix(out)
        .unwrap_or(path)
        .to_string_lossy()
        .into_owned()
}

fn write_instances(
    out: &Path,
    maps: &[(String, GridMap)],
    planned: &[PlannedInstance],
) -> Result<Vec<String>, CliError> {
    let mut written = Vec::new();
    for (name, map) in maps {
        let path = out.join("maps").join(format!("{name}.map"));
        write_atomic(&path, write_map(map).as_bytes())?;
        written.push(rel(out, &path));
    }
    for p in planned {
        let Ok(inst) = &p.instance else { continue };
        let path = out.join("instances").join(format!("{}.json", p.id));
        let file = InstanceFile {
            map: format!("../maps/{}.map", p.map_name),
            agents: inst.agents().to_vec(),
            seed: p.seed,
        };
        write_json(&path, &file)?;
        written.push(rel(out, &path));
    }
    Ok(written)
}

fn collisions_meta(solvers: &[SolverName]) -> BTreeMap<&'static str, &'static str> {
    solvers
        .iter()
        .map(|&s| {
            let family = match s {
                SolverName::Cbs => alertmapf_core::SolverFamily::Cbs,
                _ => alertmapf_core::SolverFamily::Alert,
            };
            (s.as_str(), collisions_definition(family))
        })
        .collect()
}

/// Writes maps, instance files and a manifest; returns the instance paths.
///
/// Fails if any agent count does not fit its map.
pub fn cmd_gen(config: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    config.validate()?;
    let maps = experiment_maps(config)?;
    let planned = plan_instances(config, &maps);
    if let Some(bad) = planned.iter().find(|p| p.instance.is_err()) {
        return Err(CliError::Config(format!(
            "{}: {}",
            bad.id,
            bad.instance.as_ref().unwrap_err()
        )));
    }
    let artifacts = write_instances(out, &maps, &planned)?;
    let manifest = Manifest {
        command: "gen",
        config_hash: config.hash(),
        seed: config.seed,
        config,
        collisions_counts: collisions_meta(&config.solvers),
        artifacts,
        failures: Vec::new(),
    };
    write_json(&out.join("manifest.json"), &manifest)?;
    Ok(planned
        .iter()
        .map(|p| out.join("instances").join(format!("{}.json", p.id)))
        .collect())
}

/// Loads an instance file and the map it points to (relative to the file).
pub fn load_instance(path: &Path) -> Result<(ProblemInstance, InstanceFile), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let file: InstanceFile = serde_json::from_str(&text).map_err(|e| CliError::parse(path, e))?;
    let map_path = path.parent().unwrap_or(Path::new(".")).join(&file.map);
    let map_text = std::fs::read_to_string(&map_path).map_err(|e| CliError::io(&map_path, e))?;
    let map = parse_map(&map_text).map_err(|e| CliError::parse(&map_path, e))?;
    let id = path.file_stem().map_or_else(
        || "instance".to_owned(),
        |s| s.to_string_lossy().into_owned(),
    );
    let instance = ProblemInstance::new(map, file.agents.clone(), id)?;
    Ok((instance, file))
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub row: RunRow,
    pub solution_path: PathBuf,
}

#[derive(Serialize)]
struct SolveIdentity<'a> {
    solver: SolverName,
    settings: &'a SolverSettings,
    seed: u64,
}

/// Solves one instance file and writes `<id>.<solver>.solution.json`,
/// `.metrics.csv` and, for alert solvers, `.alerts.jsonl` under `out`.
pub fn cmd_solve(
    instance_path: &Path,
    solver: SolverName,
    settings: &SolverSettings,
    seed: Option<u64>,
    out: &Path,
) -> Result<SolveReport, CliError> {
    settings.validate()?;
    let (instance, file) = load_instance(instance_path)?;
    let seed = seed.unwrap_or(file.seed);
    let config_hash = hash_json(&SolveIdentity {
        solver,
        settings,
        seed,
    });
    let policy_seed = derive_seed(seed, SEED_POLICY, instance.agent_count(), 0);
    let outcome = run_solver(&instance, solver, settings, policy_seed);

    let stem = format!("{}.{}", instance.id(), solver.as_str());
    let solution_path = out.join(format!("{stem}.solution.json"));
    write_json(
        &solution_path,
        &SolutionFile::new(instance.id(), solver.as_str(), &outcome, &config_hash, seed),
    )?;
    if solver != SolverName::Cbs {
        write_atomic(
            &out.join(format!("{stem}.alerts.jsonl")),
            &alert_log_jsonl(&outcome.alert_log),
        )?;
    }
    let row = RunRow::new(
        instance.id(),
        solver.as_str(),
        instance.agent_count(),
        &outcome.metrics,
    );
    write_atomic(
        &out.join(format!("{stem}.metrics.csv")),
        &to_csv(std::slice::from_ref(&row), RUNS_HEADER)?,
    )?;
    Ok(SolveReport {
        status: outcome.status,
        row,
        solution_path,
    })
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub runs: Vec<RunRow>,
    pub aggregates: Vec<AggregateRow>,
    pub failures: Vec<String>,
}

/// Runs the whole grid on `jobs` threads (0 = all cores) and writes
/// `runs.csv`, `aggregate.csv`, `manifest.json`, instance files and per-run
/// solutions and alert logs under `out`. Individual failures become unsolved
/// rows, never errors.
pub fn cmd_bench(
    config: &ExperimentConfig,
    jobs: usize,
    out: &Path,
) -> Result<BenchReport, CliError> {
    config.validate()?;
    let settings = config.settings();
    let config_hash = config.hash();
    let maps = experiment_maps(config)?;
    let planned = plan_instances(config, &maps);
    let mut artifacts = write_instances(out, &maps, &planned)?;

    let work: Vec<(&PlannedInstance, SolverName)> = planned
        .iter()
        .flat_map(|p| config.solvers.iter().map(move |&s| (p, s)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    let outcomes: Vec<Option<SolveOutcome>> = pool.install(|| {
        work.par_iter()
            .map(|(p, solver)| {
                let inst = p.instance.as_ref().ok()?;
                let policy_seed = derive_seed(config.seed, SEED_POLICY, p.agents, p.index);
                Some(run_solver(inst, *solver, &settings, policy_seed))
            })
            .collect()
    });

    let mut runs = Vec::with_capacity(work.len());
    let mut failures = Vec::new();
    for ((p, solver), outcome) in work.iter().zip(&outcomes) {
        let name = solver.as_str();
        let Some(outcome) = outcome else {
            failures.push(format!(
                "{} {}: {}",
                p.id,
                name,
                p.instance.as_ref().unwrap_err()
            ));
            runs.push(RunRow::failed(&p.id, name, p.agents));
            continue;
        };
        let base = format!("{}.{name}", p.id);
        let solution = out.join("runs").join(format!("{base}.solution.json"));
        write_json(
            &solution,
            &SolutionFile::new(&p.id, name, outcome, &config_hash, p.seed),
        )?;
        artifacts.push(rel(out, &solution));
        if *solver != SolverName::Cbs {
            let log = out.join("runs").join(format!("{base}.alerts.jsonl"));
            write_atomic(&log, &alert_log_jsonl(&outcome.alert_log))?;
            artifacts.push(rel(out, &log));
        }
        runs.push(RunRow::new(&p.id, name, p.agents, &outcome.metrics));
    }

    let label = config.map.label();
    let mut aggregates = Vec::new();
    for &n in &config.agents {
        for &solver in &config.solvers {
            let batch: Vec<_> = work
                .iter()
                .zip(&outcomes)
                .filter(|((p, s), _)| p.agents == n && *s == solver)
                .map(|(_, o)| o.as_ref().map(|o| o.metrics.clone()).unwrap_or_default())
                .collect();
            let summary = aggregate(&batch).expect("instances is positive");
            aggregates.push(AggregateRow::new(&label, n, solver.as_str(), &summary));
        }
    }

    write_atomic(&out.join("runs.csv"), &to_csv(&runs, RUNS_HEADER)?)?;
    write_atomic(
        &out.join("aggregate.csv"),
        &to_csv(&aggregates, AGGREGATE_HEADER)?,
    )?;
    artifacts.extend(["runs.csv".to_owned(), "aggregate.csv".to_owned()]);
    let manifest = Manifest {
        command: "bench",
        config_hash,
        seed: config.seed,
        config,
        collisions_counts: collisions_meta(&config.solvers),
        artifacts,
        failures: failures.clone(),
    };
    write_json(&out.join("manifest.json"), &manifest)?;
    Ok(BenchReport {
        runs,
        aggregates,
        failures,
    })
}

/// Information loads, in IU, for one scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfoLoadTable {
    pub distributed: f64,
    pub alert: f64,
    /// Percent; `None` when the distributed load is zero.
    pub reduction: Option<f64>,
}

impl std::fmt::Display for InfoLoadTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let units = |x: f64| {
            if x.fract() == 0.0 && x.abs() < 1e15 {
                format!("{x:.0}")
            } else {
                format!("{x:.2}")
            }
        };
        writeln!(f, "distributed IU: {}", units(self.distributed))?;
        writeln!(f, "alert IU:       {}", units(self.alert))?;
        match self.reduction {
            Some(r) => writeln!(f, "reduction:      {r:.2}%"),
            None => writeln!(f, "reduction:      N/A"),
        }
    }
}

/// `N T D L C I_alert` to the two loads and the saving.
pub fn cmd_info_load(
    n: f64,
    t: f64,
    d: f64,
    l: f64,
    c: f64,
    i_alert: f64,
) -> Result<InfoLoadTable, CliError> {
    let values = [
        ("N", n),
        ("T", t),
        ("D", d),
        ("L", l),
        ("C", c),
        ("I_alert", i_alert),
    ];
    if let Some((name, v)) = values.iter().find(|(_, v)| !(v.is_finite() && *v >= 0.0)) {
        return Err(CliError::Usage(format!(
            "{name} must be a non-negative number, got {v}"
        )));
    }
    let p = InfoLoadParams {
        agents: n,
        makespan: t,
        neighbor_density: d,
        path_length: l,
        conflicts: c,
        alert_size: i_alert,
    };
    Ok(InfoLoadTable {
        distributed: info_load_distributed(&p),
        alert: info_load_alert(&p),
        reduction: info_load_reduction(&p),
    })
}
