//! Experiment configuration files.
//!
//! A config is JSON (schema in `config.schema.json` next to this crate's
//! manifest). Relative map paths resolve against the config file's directory.

use std::path::{Path, PathBuf};
use std::time::Duration;

use alertmapf_core::coordinator::CoordinatorConfig;
use alertmapf_core::{CbsConfig, Objective, PlannerKind, SelectionPolicy};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapSpec {
    Maze {
        width: usize,
        height: usize,
        density: f64,
    },
    Warehouse {
        width: usize,
        height: usize,
    },
    /// A MovingAI `.map` file.
    File {
        path: PathBuf,
    },
}

impl MapSpec {
    /// Short name used in instance ids and the aggregate `map` column.
    pub fn label(&self) -> String {
        match self {
            MapSpec::Maze {
                width,
                height,
                density,
            } => format!("maze{width}x{height}-d{density}"),
            MapSpec::Warehouse { width, height } => format!("warehouse{width}x{height}"),
            MapSpec::File { path } => path
                .file_stem()
                .map_or_else(|| "map".to_owned(), |s| s.to_string_lossy().into_owned()),
        }
    }

    /// Whether each instance index gets its own freshly generated map.
    pub fn is_generated(&self) -> bool {
        !matches!(self, MapSpec::File { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SolverName {
    #[serde(rename = "alert-bfs")]
    AlertBfs,
    #[serde(rename = "alert-astar")]
    AlertAstar,
    #[serde(rename = "cbs")]
    Cbs,
}

impl SolverName {
    pub fn as_str(self) -> &'static str {
        match self {
            SolverName::AlertBfs => "alert-bfs",
            SolverName::AlertAstar => "alert-astar",
            SolverName::Cbs => "cbs",
        }
    }
}

impl std::str::FromStr for SolverName {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "alert-bfs" => Ok(SolverName::AlertBfs),
            "alert-astar" => Ok(SolverName::AlertAstar),
            "cbs" => Ok(SolverName::Cbs),
            other => Err(CliError::Usage(format!(
                "unknown solver {other:?} (expected alert-bfs, alert-astar or cbs)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyName {
    Ffc,
    Farthest,
    /// Seeded per run from the master seed.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoordinatorKnobs {
    pub policy: PolicyName,
    pub rewind_r: usize,
    /// `null` disables escalation (static alerts only); `0` is dynamic only.
    pub escalation_threshold: Option<u32>,
    /// Weight for `alert-astar`.
    pub astar_weight: f64,
    pub rotate_on_recurrence: bool,
    pub remember_tracks: bool,
}

impl Default for CoordinatorKnobs {
    fn default() -> Self {
        let d = CoordinatorConfig::default();
        Self {
            policy: PolicyName::Ffc,
            rewind_r: d.rewind_r,
            escalation_threshold: d.escalation_threshold,
            astar_weight: alertmapf_core::planner::DEFAULT_ASTAR_WEIGHT,
            rotate_on_recurrence: d.rotate_on_recurrence,
            remember_tracks: d.remember_tracks,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CbsKnobs {
    pub objective: Objective,
    pub max_nodes: Option<usize>,
}

/// Solver settings shared by `solve` and `bench`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    pub coordinator: CoordinatorKnobs,
    pub cbs: CbsKnobs,
    pub time_limit_secs: f64,
    pub max_iterations: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        let d = CoordinatorConfig::default();
        Self {
            coordinator: CoordinatorKnobs::default(),
            cbs: CbsKnobs::default(),
            time_limit_secs: d.time_budget.as_secs_f64(),
            max_iterations: d.max_iterations,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.time_limit_secs.is_finite() && self.time_limit_secs > 0.0) {
            return Err(CliError::Config(format!(
                "time_limit_secs must be positive, got {}",
                self.time_limit_secs
            )));
        }
        if self.max_iterations == 0 {
            return Err(CliError::Config("max_iterations must be positive".into()));
        }
        // Also rejects NaN.
        if self.coordinator.astar_weight.is_nan() || self.coordinator.astar_weight < 1.0 {
            return Err(CliError::Config(format!(
                "astar_weight must be at least 1, got {}",
                self.coordinator.astar_weight
            )));
        }
        if self.cbs.max_nodes == Some(0) {
            return Err(CliError::Config("cbs.max_nodes must be positive".into()));
        }
        Ok(())
    }

    pub fn time_budget(&self) -> Duration {
        Duration::from_secs_f64(self.time_limit_secs)
    }

    /// Coordinator config for an alert solver; `policy_seed` feeds the random policy.
    pub fn coordinator_config(&self, solver: SolverName, policy_seed: u64) -> CoordinatorConfig {
        let k = &self.coordinator;
        CoordinatorConfig {
            selection_policy: match k.policy {
                PolicyName::Ffc => SelectionPolicy::Ffc,
                PolicyName::Farthest => SelectionPolicy::Farthest,
                PolicyName::Random => SelectionPolicy::Random { seed: policy_seed },
            },
            rewind_r: k.rewind_r,
            planner: match solver {
                SolverName::AlertAstar => PlannerKind::weighted_astar(k.astar_weight),
                _ => PlannerKind::bfs(),
            },
            escalation_threshold: k.escalation_threshold,
            max_iterations: self.max_iterations,
            time_budget: self.time_budget(),
            rotate_on_recurrence: k.rotate_on_recurrence,
            remember_tracks: k.remember_tracks,
        }
    }

    pub fn cbs_config(&self) -> CbsConfig {
        CbsConfig {
            objective: self.cbs.objective,
            time_budget: self.time_budget(),
            max_nodes: self.cbs.max_nodes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub map: MapSpec,
    /// Agent counts; each is run on every instance index.
    pub agents: Vec<usize>,
    /// Instances per (map, agent count).
    pub instances: usize,
    pub solvers: Vec<SolverName>,
    #[serde(default)]
    pub coordinator: CoordinatorKnobs,
    #[serde(default)]
    pub cbs: CbsKnobs,
    #[serde(default = "default_time_limit")]
    pub time_limit_secs: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub seed: u64,
}

fn default_time_limit() -> f64 {
    SolverSettings::default().time_limit_secs
}

fn default_max_iterations() -> usize {
    SolverSettings::default().max_iterations
}

impl ExperimentConfig {
    pub fn settings(&self) -> SolverSettings {
        SolverSettings {
            coordinator: self.coordinator,
            cbs: self.cbs,
            time_limit_secs: self.time_limit_secs,
            max_iterations: self.max_iterations,
        }
    }

    /// Reads, resolves relative paths and validates a config file.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut config: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let MapSpec::File { path: map } = &mut config.map {
            if map.is_relative() {
                *map = base.join(&*map);
            }
        }
        if let Some(out) = &mut config.out {
            if out.is_relative() {
                *out = base.join(&*out);
            }
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.agents.is_empty() || self.agents.contains(&0) {
            return Err(CliError::Config("agents must list positive counts".into()));
        }
        if self.instances == 0 {
            return Err(CliError::Config("instances must be positive".into()));
        }
        if self.solvers.is_empty() {
            return Err(CliError::Config("solvers must not be empty".into()));
        }
        if let MapSpec::File { path } = &self.map {
            if !path.is_file() {
                return Err(CliError::Config(format!(
                    "map file {} does not exist",
                    path.display()
                )));
            }
        }
        self.settings().validate()
    }

    /// Hex SHA-256 of the config's canonical JSON, output directory excluded.
    pub fn hash(&self) -> String {
        let canonical = ExperimentConfig {
            out: None,
            ..self.clone()
        };
        hash_json(&canonical)
    }
}

/// Hex SHA-256 of `value` serialized as compact JSON.
pub fn hash_json<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("config types serialize");
    hex::encode(Sha256::digest(bytes))
}

/// Stream-separated seed for one `(purpose, agents, index)` slot, so adding
/// agent counts or instances never changes existing ones.
pub fn derive_seed(master: u64, purpose: u64, agents: usize, index: usize) -> u64 {
    let mut z = master
        ^ purpose.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (agents as u64).wrapping_mul(0xBF58_476D_1CE4_E5B9)
        ^ (index as u64).wrapping_mul(0x94D0_49BB_1331_11EB);
    // splitmix64 finalizer
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub const SEED_MAP: u64 = 1;
pub const SEED_INSTANCE: u64 = 2;
pub const SEED_POLICY: u64 = 3;
