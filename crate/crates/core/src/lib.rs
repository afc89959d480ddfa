//! Multi-agent pathfinding on 4-connected grids with alert-based
//! coordination.
//!
//! Agents plan independently; a central coordinator detects vertex and edge
//! conflicts and sends targeted replanning alerts to one agent per conflict.
//! A Conflict-Based Search solver and an information-load model are included
//! for comparison.
//!
//! ```
//! use alertmapf_core::{resolve, AgentTask, CoordinatorConfig, GridMap, Position, ProblemInstance};
//!
//! let map = GridMap::from_ascii(&["....", "....", "...."]).unwrap();
//! let agents = vec![
//!     AgentTask { start: Position::new(1, 0), goal: Position::new(1, 3) },
//!     AgentTask { start: Position::new(0, 1), goal: Position::new(2, 1) },
//! ];
//! let instance = ProblemInstance::new(map, agents, "demo").unwrap();
//! let outcome = resolve(&instance, &CoordinatorConfig::default());
//! assert!(outcome.is_solved());
//! ```

pub mod cbs;
pub mod conflict;
pub mod coordinator;
pub mod generate;
pub mod grid;
pub mod instance;
pub mod metrics;
pub mod movingai;
pub mod outcome;
pub mod planner;
pub mod trajectory;
pub mod validate;

pub use cbs::{cbs_solve, CbsConfig, Objective};
pub use conflict::{detect_conflicts, first_conflict, Conflict, ConflictKind, ConflictLocation};
pub use coordinator::{
    resolve, AlertMessage, AlertPayload, CoordinatorConfig, SelectionPolicy, Tier,
};
pub use generate::{generate_maze, generate_warehouse};
pub use grid::{GridMap, Position};
pub use instance::{sample_instance, AgentTask, InstanceFile, ProblemInstance};
pub use metrics::{aggregate, InfoLoadParams, RunMetrics, Summary};
pub use outcome::{SolveOutcome, SolveStatus, SolverFamily};
pub use planner::{plan, ConstraintSet, PlanError, PlannerKind, SearchKind};
pub use trajectory::{Trajectory, TrajectorySet};
pub use validate::{check_solution, Violation};
