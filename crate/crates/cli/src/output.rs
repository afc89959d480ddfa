//! Artifact formats and atomic file writing.

use std::io::Write;
use std::path::Path;

use alertmapf_core::metrics::Summary;
use alertmapf_core::{
    AlertMessage, RunMetrics, SolveOutcome, SolveStatus, SolverFamily, Trajectory,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const RUNS_HEADER: &str =
    "instance_id,solver,agents,solved,makespan,sum_of_costs,collisions,wall_time_ms,iterations,iu_alert,iu_distributed";
pub const AGGREGATE_HEADER: &str = "map,agents,solver,sr,mean_ms,mean_co,mean_t_ms,runs";

/// Writes `bytes` to `path` through a temporary file in the same directory,
/// so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("artifact types serialize");
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

/// One `AlertMessage` per line.
pub fn alert_log_jsonl(log: &[AlertMessage]) -> Vec<u8> {
    let mut out = Vec::new();
    for alert in log {
        serde_json::to_writer(&mut out, alert).expect("alerts serialize");
        out.push(b'\n');
    }
    out
}

fn fixed3(x: f64) -> String {
    format!("{x:.3}")
}

/// One line of the per-run CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub instance_id: String,
    pub solver: String,
    pub agents: usize,
    pub solved: bool,
    pub makespan: Option<usize>,
    pub sum_of_costs: Option<usize>,
    pub collisions: usize,
    pub wall_time_ms: String,
    pub iterations: usize,
    pub iu_alert: String,
    pub iu_distributed: String,
}

impl RunRow {
    pub fn new(instance_id: &str, solver: &str, agents: usize, m: &RunMetrics) -> Self {
        Self {
            instance_id: instance_id.to_owned(),
            solver: solver.to_owned(),
            agents,
            solved: m.solved,
            makespan: m.makespan,
            sum_of_costs: m.sum_of_costs,
            collisions: m.collisions,
            wall_time_ms: fixed3(m.wall_time.as_secs_f64() * 1e3),
            iterations: m.iterations,
            iu_alert: fixed3(m.info_units_alert),
            iu_distributed: fixed3(m.info_units_distributed_reference),
        }
    }

    /// Row for a run that could not start, such as an unsampleable instance.
    pub fn failed(instance_id: &str, solver: &str, agents: usize) -> Self {
        Self::new(instance_id, solver, agents, &RunMetrics::default())
    }
}

/// One line of the aggregate CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub map: String,
    pub agents: usize,
    pub solver: String,
    /// Success rate as a fraction.
    pub sr: String,
    pub mean_ms: Option<String>,
    pub mean_co: Option<String>,
    pub mean_t_ms: String,
    pub runs: usize,
}

impl AggregateRow {
    pub fn new(map: &str, agents: usize, solver: &str, s: &Summary) -> Self {
        Self {
            map: map.to_owned(),
            agents,
            solver: solver.to_owned(),
            sr: format!("{:.4}", s.success_rate),
            mean_ms: s.mean_makespan.map(fixed3),
            mean_co: s.mean_collisions.map(fixed3),
            mean_t_ms: fixed3(s.mean_wall_time_ms),
            runs: s.runs,
        }
    }
}

/// Serializes rows with the header from the field names.
pub fn to_csv<T: Serialize>(rows: &[T], header: &str) -> Result<Vec<u8>, CliError> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    w.write_record(header.split(','))?;
    for row in rows {
        w.serialize(row)?;
    }
    w.into_inner()
        .map_err(|e| CliError::Usage(format!("csv flush: {e}")))
}

pub fn collisions_definition(family: SolverFamily) -> &'static str {
    match family {
        SolverFamily::Alert => "alerts issued",
        SolverFamily::Cbs => "high-level node expansions",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsFile {
    pub iterations: usize,
    pub nodes_generated: usize,
    pub conflicts_inspected: usize,
}

/// Per-run solution artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub instance_id: String,
    pub solver: String,
    pub status: SolveStatus,
    pub config_hash: String,
    pub seed: u64,
    /// Collision-free trajectories, present only when solved.
    pub trajectories: Option<Vec<Trajectory>>,
    /// Paths held when the solver stopped.
    pub final_paths: Option<Vec<Trajectory>>,
    pub metrics: RunMetrics,
    pub collisions_counts: String,
    pub stats: StatsFile,
}

impl SolutionFile {
    pub fn new(
        instance_id: &str,
        solver: &str,
        outcome: &SolveOutcome,
        config_hash: &str,
        seed: u64,
    ) -> Self {
        Self {
            instance_id: instance_id.to_owned(),
            solver: solver.to_owned(),
            status: outcome.status,
            config_hash: config_hash.to_owned(),
            seed,
            trajectories: outcome.solution.as_ref().map(|s| s.as_slice().to_vec()),
            final_paths: outcome.final_paths.as_ref().map(|s| s.as_slice().to_vec()),
            metrics: outcome.metrics.clone(),
            collisions_counts: collisions_definition(outcome.solver).to_owned(),
            stats: StatsFile {
                iterations: outcome.stats.iterations,
                nodes_generated: outcome.stats.nodes_generated,
                conflicts_inspected: outcome.stats.conflicts_inspected,
            },
        }
    }
}
