use serde::{Deserialize, Serialize};

use super::cluster::{cluster_obstacles, ClusterParams, ObstacleCluster};
use super::feasibility::{
    clearance_for, feasible_actions, score_actions, ActionGrid, FeasibilityMask, ObjectiveVector,
};
use super::pareto::{pareto_front, select_action};
use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::risk::CpaThresholds;
use crate::tracking::Track;
use crate::world::{Action, Vec2, VesselState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlanParams {
    /// m/s; the speed a speed factor of 1 refers to.
    pub nominal_speed: f64,
    /// Required clearance from every cluster disc, metres.
    pub d_safe: f64,
    /// Look-ahead for the feasibility test, seconds.
    pub horizon: f64,
    /// Test every track as its own disc instead of cluster representatives.
    pub per_member: bool,
    pub grid: ActionGrid,
    /// Weights of goal deviation, speed penalty, clearance deficit, COLREGs penalty.
    pub weights: [f64; 4],
    pub cluster: ClusterParams,
    pub thresholds: CpaThresholds,
}

impl Default for PlanParams {
    fn default() -> Self {
        Self {
            nominal_speed: 5.0,
            d_safe: 20.0,
            horizon: 120.0,
            per_member: false,
            grid: ActionGrid::default(),
            weights: [0.35, 0.15, 0.35, 0.15],
            cluster: ClusterParams::default(),
            thresholds: CpaThresholds::default(),
        }
    }
}

impl PlanParams {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("nominal_speed", self.nominal_speed)?;
        ensure_finite("d_safe", self.d_safe)?;
        ensure_positive("horizon", self.horizon)?;
        if self.weights.iter().any(|w| !w.is_finite() || *w < 0.0)
            || (self.weights.iter().sum::<f64>() - 1.0).abs() > 1e-9
        {
            return Err(Error::validation(
                "weights",
                "must be four non-negative reals summing to 1",
            ));
        }
        self.grid.validate()?;
        self.cluster.validate()?;
        self.thresholds.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanDiagnostics {
    pub clusters: Vec<ObstacleCluster>,
    pub mask: FeasibilityMask,
    pub scored: Vec<(Action, ObjectiveVector)>,
    pub front: Vec<(Action, ObjectiveVector)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanResult {
    pub action: Action,
    /// No grid action was feasible; `action` is the contingency.
    pub deadlock: bool,
    pub diagnostics: PlanDiagnostics,
}

/// Clusters the tracks, tests every grid action, and selects from the Pareto
/// front. With an empty feasible set it returns the contingency action: the
/// slowest grid speed on the heading with the largest predicted clearance.
pub fn plan(ego: &VesselState, tracks: &[Track], goal: Vec2, params: &PlanParams) -> PlanResult {
    let cluster_params = if params.per_member {
        ClusterParams {
            cutoff: f64::MIN_POSITIVE,
            ..params.cluster
        }
    } else {
        params.cluster
    };
    let clusters = cluster_obstacles(ego, tracks, &cluster_params);
    let grid = &params.grid;
    let mask = feasible_actions(ego, &clusters, grid, params);
    let scored = score_actions(ego, &clusters, goal, grid, &mask, params);

    let (action, deadlock, front) = match pareto_front(&scored) {
        Ok(front) => {
            let action = select_action(&front, &params.weights).expect("front is non-empty");
            (action, false, front)
        }
        Err(_) => (contingency(ego, &clusters, params), true, Vec::new()),
    };

    PlanResult {
        action,
        deadlock,
        diagnostics: PlanDiagnostics {
            clusters,
            mask,
            scored,
            front,
        },
    }
}

fn contingency(ego: &VesselState, clusters: &[ObstacleCluster], params: &PlanParams) -> Action {
    let speed_factor = params
        .grid
        .speed_factors
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let mut best: Option<(f64, Action)> = None;
    for &heading_delta in &params.grid.heading_deltas {
        let a = Action {
            heading_delta,
            speed_factor,
        };
        let c = clearance_for(ego, &a, clusters, params);
        let better = match best {
            None => true,
            Some((bc, ba)) => {
                c > bc
                    || (c == bc
                        && (a.heading_delta.abs(), a.heading_delta < 0.0)
                            < (ba.heading_delta.abs(), ba.heading_delta < 0.0))
            }
        };
        if better {
            best = Some((c, a));
        }
    }
    best.map(|(_, a)| a).unwrap_or(Action::HOLD)
}
