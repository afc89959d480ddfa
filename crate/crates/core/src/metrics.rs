//! Run metrics (success, makespan, collisions, time) and the information
//! load model comparing alert-based coordination with continuous sensing.
//!
//! One information unit (IU) is one agent state at one timestep.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::ProblemInstance;
use crate::outcome::{SolveOutcome, SolverFamily};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub solved: bool,
    /// `max_i τ_i`, solved runs only.
    pub makespan: Option<usize>,
    /// `Σ_i τ_i`, solved runs only.
    pub sum_of_costs: Option<usize>,
    /// Alerts issued (coordinator) or high-level expansions (CBS).
    pub collisions: usize,
    #[serde(with = "duration_ms")]
    pub wall_time: Duration,
    pub iterations: usize,
    pub info_units_alert: f64,
    pub info_units_distributed_reference: f64,
}

mod duration_ms {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64() * 1e3)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Ok(Duration::from_secs_f64(f64::deserialize(d)? / 1e3))
    }
}

/// Inputs of the information-load formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfoLoadParams {
    /// Agent count N.
    pub agents: f64,
    /// Makespan T.
    pub makespan: f64,
    /// Mean number of other agents each agent observes per timestep, D.
    pub neighbor_density: f64,
    /// Mean initial path length L.
    pub path_length: f64,
    /// Conflicts resolved C.
    pub conflicts: f64,
    /// IU per alert.
    pub alert_size: f64,
}

/// `N × T × D`: every agent sensing its neighbors at every timestep.
pub fn info_load_distributed(p: &InfoLoadParams) -> f64 {
    p.agents * p.makespan * p.neighbor_density
}

/// `N × L + C × I_alert`: one-time path submission plus targeted alerts.
pub fn info_load_alert(p: &InfoLoadParams) -> f64 {
    p.agents * p.path_length + p.conflicts * p.alert_size
}

/// Percentage saved by alerts relative to the distributed load, `None` when
/// the distributed load is zero.
pub fn info_load_reduction(p: &InfoLoadParams) -> Option<f64> {
    let distributed = info_load_distributed(p);
    (distributed > 0.0).then(|| (1.0 - info_load_alert(p) / distributed) * 100.0)
}

/// Field of view used for the distributed reference load; `None` sees the whole map.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FieldOfView {
    /// Chebyshev radius in cells.
    pub radius: Option<usize>,
}

/// Extracts the information-load parameters of a run.
///
/// `L` comes from the initial paths; `T` and `D` from the solution (or the
/// last held paths if unsolved). `C × I_alert` is the summed IU of the
/// alert log, so dynamic alerts count their track entries.
pub fn info_params(
    outcome: &SolveOutcome,
    instance: &ProblemInstance,
    fov: FieldOfView,
) -> InfoLoadParams {
    let n = instance.agent_count();
    let path_length = outcome
        .initial_paths
        .as_ref()
        .filter(|s| !s.is_empty())
        .map_or(0.0, |s| s.sum_of_costs() as f64 / s.len() as f64);

    let reference = outcome.solution.as_ref().or(outcome.final_paths.as_ref());
    let (makespan, neighbor_density) = reference.map_or((0.0, 0.0), |set| {
        let mut observed = 0usize;
        let mut samples = 0usize;
        for traj in set {
            for (t, &cell) in traj.cells.iter().enumerate() {
                samples += 1;
                observed += set
                    .iter()
                    .filter(|o| o.agent != traj.agent)
                    .filter_map(|o| o.position_at(t))
                    .filter(|o| {
                        fov.radius.is_none_or(|r| {
                            o.row.abs_diff(cell.row).max(o.col.abs_diff(cell.col)) <= r
                        })
                    })
                    .count();
            }
        }
        let d = if samples == 0 {
            0.0
        } else {
            observed as f64 / samples as f64
        };
        (set.makespan() as f64, d)
    });

    let conflicts = outcome.alert_log.len();
    let alert_units: usize = outcome.alert_log.iter().map(|a| a.info_units()).sum();
    InfoLoadParams {
        agents: n as f64,
        makespan,
        neighbor_density,
        path_length,
        conflicts: conflicts as f64,
        alert_size: if conflicts == 0 {
            1.0
        } else {
            alert_units as f64 / conflicts as f64
        },
    }
}

/// Metrics of a finished run with a whole-map field of view.
pub fn measure_run(outcome: &SolveOutcome, instance: &ProblemInstance) -> RunMetrics {
    measure_run_with(outcome, instance, FieldOfView::default())
}

pub fn measure_run_with(
    outcome: &SolveOutcome,
    instance: &ProblemInstance,
    fov: FieldOfView,
) -> RunMetrics {
    let params = info_params(outcome, instance, fov);
    let alert_units: usize = outcome.alert_log.iter().map(|a| a.info_units()).sum();
    let collisions = match outcome.solver {
        SolverFamily::Alert => outcome.alert_log.len(),
        SolverFamily::Cbs => outcome.stats.iterations,
    };
    RunMetrics {
        solved: outcome.is_solved(),
        makespan: outcome.solution.as_ref().map(|s| s.makespan()),
        sum_of_costs: outcome.solution.as_ref().map(|s| s.sum_of_costs()),
        collisions,
        wall_time: outcome.stats.wall_time,
        iterations: outcome.stats.iterations,
        info_units_alert: params.agents * params.path_length + alert_units as f64,
        info_units_distributed_reference: info_load_distributed(&params),
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("cannot aggregate an empty batch")]
    EmptyBatch,
}

/// Batch summary. Makespan and collisions average over solved runs only;
/// time averages over every run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub runs: usize,
    pub solved: usize,
    /// Success rate in `[0, 1]`.
    pub success_rate: f64,
    pub mean_makespan: Option<f64>,
    pub mean_collisions: Option<f64>,
    pub mean_wall_time_ms: f64,
}

pub fn aggregate(batch: &[RunMetrics]) -> Result<Summary, MetricsError> {
    if batch.is_empty() {
        return Err(MetricsError::EmptyBatch);
    }
    let solved: Vec<&RunMetrics> = batch.iter().filter(|m| m.solved).collect();
    let mean = |xs: Vec<f64>| (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64);
    Ok(Summary {
        runs: batch.len(),
        solved: solved.len(),
        success_rate: solved.len() as f64 / batch.len() as f64,
        mean_makespan: mean(
            solved
                .iter()
                .filter_map(|m| m.makespan)
                .map(|v| v as f64)
                .collect(),
        ),
        mean_collisions: mean(solved.iter().map(|m| m.collisions as f64).collect()),
        mean_wall_time_ms: batch
            .iter()
            .map(|m| m.wall_time.as_secs_f64() * 1e3)
            .sum::<f64>()
            / batch.len() as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: f64, t: f64, d: f64, l: f64, c: f64, i: f64) -> InfoLoadParams {
        InfoLoadParams {
            agents: n,
            makespan: t,
            neighbor_density: d,
            path_length: l,
            conflicts: c,
            alert_size: i,
        }
    }

    #[test]
    fn reference_scenario() {
        let p = params(20.0, 27.0, 19.0, 25.0, 191.0, 1.0);
        assert_eq!(info_load_distributed(&p), 10_260.0);
        assert_eq!(info_load_alert(&p), 691.0);
        let r = info_load_reduction(&p).unwrap();
        assert!((r - 93.27).abs() < 0.01, "{r}");
    }

    #[test]
    fn degenerate_loads() {
        assert_eq!(
            info_load_distributed(&params(0.0, 27.0, 19.0, 0.0, 0.0, 1.0)),
            0.0
        );
        assert_eq!(
            info_load_distributed(&params(2.0, 3.0, 1.0, 0.0, 0.0, 1.0)),
            6.0
        );
        assert_eq!(info_load_alert(&params(4.0, 0.0, 0.0, 7.0, 0.0, 1.0)), 28.0);
        assert_eq!(
            info_load_reduction(&params(4.0, 5.0, 0.0, 7.0, 0.0, 1.0)),
            None
        );
        assert_eq!(
            info_load_reduction(&params(4.0, 5.0, 1.0, 0.0, 0.0, 1.0)),
            Some(100.0)
        );
    }

    fn run(solved: bool, ms: usize, co: usize, ms_time: u64) -> RunMetrics {
        RunMetrics {
            solved,
            makespan: solved.then_some(ms),
            sum_of_costs: solved.then_some(ms * 2),
            collisions: co,
            wall_time: Duration::from_millis(ms_time),
            ..RunMetrics::default()
        }
    }

    #[test]
    fn aggregate_counts_and_means() {
        let mut batch: Vec<RunMetrics> = (0..9).map(|_| run(true, 10, 4, 100)).collect();
        batch.push(run(false, 0, 99, 500));
        let s = aggregate(&batch).unwrap();
        assert_eq!(s.success_rate, 0.9);
        assert_eq!(s.mean_makespan, Some(10.0));
        assert_eq!(s.mean_collisions, Some(4.0));
        assert_eq!(s.mean_wall_time_ms, 140.0);
        assert_eq!(aggregate(&[]), Err(MetricsError::EmptyBatch));
    }

    #[test]
    fn aggregate_hand_computed() {
        // Solved: (12, 3, 20ms), (18, 7, 40ms); failed: 90ms.
        let batch = [
            run(true, 12, 3, 20),
            run(false, 0, 0, 90),
            run(true, 18, 7, 40),
        ];
        let s = aggregate(&batch).unwrap();
        assert!((s.success_rate - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(s.mean_makespan, Some(15.0));
        assert_eq!(s.mean_collisions, Some(5.0));
        assert_eq!(s.mean_wall_time_ms, 50.0);
        let mut rev = batch.to_vec();
        rev.reverse();
        assert_eq!(aggregate(&rev).unwrap(), s);
    }

    #[test]
    fn all_unsolved_has_no_means() {
        let s = aggregate(&[run(false, 0, 3, 10)]).unwrap();
        assert_eq!(s.success_rate, 0.0);
        assert_eq!(s.mean_makespan, None);
        assert_eq!(s.mean_collisions, None);
    }
}
