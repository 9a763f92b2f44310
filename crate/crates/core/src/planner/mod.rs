//! Multi-obstacle avoidance.
//!
//! Tracks are grouped by position and velocity ([`cluster_obstacles`]); each
//! action on a discrete (heading change × speed) grid is tested against the
//! cluster discs in closed form ([`feasible_actions`]); feasible actions are
//! scored on four objectives ([`score_actions`]) and the best is picked from
//! the Pareto front ([`pareto_front`], [`select_action`]). [`plan`] runs the
//! whole pipeline and falls back to a contingency action when nothing is
//! feasible.

mod cluster;
mod feasibility;
mod pareto;
mod plan;

pub use cluster::{cluster_obstacles, ClusterParams, ObstacleCluster};
pub use feasibility::{
    feasible_actions, min_clearance, score_actions, ActionGrid, FeasibilityMask, ObjectiveVector,
};
pub use pareto::{dominates, pareto_front, select_action};
pub use plan::{plan, PlanDiagnostics, PlanParams, PlanResult};
