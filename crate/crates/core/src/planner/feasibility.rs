use serde::{Deserialize, Serialize};

use super::cluster::ObstacleCluster;
use super::plan::PlanParams;
use crate::error::{Error, Result};
use crate::risk::classify_encounter;
use crate::world::{wrap_pi, Action, Vec2, VesselState};

/// Candidate manoeuvres: every heading change paired with every speed factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionGrid {
    /// Strictly ascending, radians.
    #[serde(rename = "heading_deltas_deg", with = "crate::serde_deg::vec")]
    pub heading_deltas: Vec<f64>,
    /// Strictly ascending, in `(0, 1]`.
    pub speed_factors: Vec<f64>,
}

impl Default for ActionGrid {
    fn default() -> Self {
        Self {
            heading_deltas: (-18..=18).map(|k| (5.0 * k as f64).to_radians()).collect(),
            speed_factors: vec![0.2, 0.4, 0.6, 0.8, 1.0],
        }
    }
}

impl ActionGrid {
    pub fn validate(&self) -> Result<()> {
        if self.heading_deltas.is_empty() || self.speed_factors.is_empty() {
            return Err(Error::validation(
                "grid",
                "heading and speed axes must be non-empty",
            ));
        }
        if self.heading_deltas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::validation(
                "grid.heading_deltas_deg",
                "must be strictly ascending",
            ));
        }
        if self.speed_factors.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::validation(
                "grid.speed_factors",
                "must be strictly ascending",
            ));
        }
        if !self.heading_deltas.contains(&0.0) || !self.speed_factors.contains(&1.0) {
            return Err(Error::validation(
                "grid",
                "must contain the null action (0 deg, 1.0)",
            ));
        }
        for a in self.actions() {
            a.validate()?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.heading_deltas.len() * self.speed_factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Heading-major order: all speeds of the first heading, then the next.
    pub fn actions(&self) -> impl Iterator<Item = Action> + '_ {
        self.heading_deltas.iter().flat_map(move |&h| {
            self.speed_factors.iter().map(move |&s| Action {
                heading_delta: h,
                speed_factor: s,
            })
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityMask {
    pub headings: usize,
    pub speeds: usize,
    /// Heading-major, matching [`ActionGrid::actions`].
    pub feasible: Vec<bool>,
    /// Seconds.
    pub horizon: f64,
}

impl FeasibilityMask {
    pub fn is_feasible(&self, heading_idx: usize, speed_idx: usize) -> bool {
        self.feasible[heading_idx * self.speeds + speed_idx]
    }

    pub fn count(&self) -> usize {
        self.feasible.iter().filter(|&&f| f).count()
    }

    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }
}

/// All minimised.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveVector {
    /// Radians between the resulting heading and the bearing to the goal.
    pub goal_deviation: f64,
    /// `1 - speed_factor`.
    pub speed_penalty: f64,
    /// Metres short of the DCPA gate, floored at zero.
    pub clearance_deficit: f64,
    /// 1 when the action turns to port during a give-way encounter.
    pub colregs_penalty: f64,
}

impl ObjectiveVector {
    pub fn as_array(&self) -> [f64; 4] {
        [
            self.goal_deviation,
            self.speed_penalty,
            self.clearance_deficit,
            self.colregs_penalty,
        ]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self {
            goal_deviation: a[0],
            speed_penalty: a[1],
            clearance_deficit: a[2],
            colregs_penalty: a[3],
        }
    }
}

/// Smallest distance from the ego position to the cluster disc over
/// `t ∈ [0, horizon]`, both moving at constant velocity. Negative inside.
pub fn min_clearance(
    ego_position: Vec2,
    ego_velocity: Vec2,
    cluster: &ObstacleCluster,
    horizon: f64,
) -> f64 {
    let p = cluster.representative.position - ego_position;
    let v = cluster.velocity() - ego_velocity;
    let vv = v.norm_sq();
    let t = if vv > 0.0 {
        (-p.dot(v) / vv).clamp(0.0, horizon)
    } else {
        0.0
    };
    (p + v * t).norm() - cluster.radius
}

pub(crate) fn action_velocity(ego: &VesselState, action: &Action, nominal_speed: f64) -> Vec2 {
    Vec2::from_heading(ego.heading + action.heading_delta) * (nominal_speed * action.speed_factor)
}

pub(crate) fn clearance_for(
    ego: &VesselState,
    action: &Action,
    clusters: &[ObstacleCluster],
    params: &PlanParams,
) -> f64 {
    let v = action_velocity(ego, action, params.nominal_speed);
    clusters
        .iter()
        .map(|c| min_clearance(ego.position, v, c, params.horizon))
        .fold(f64::INFINITY, f64::min)
}

/// Marks an action feasible when, with the ego vessel at the action's
/// velocity and every cluster at constant velocity, the clearance to every
/// cluster disc stays at or above `d_safe` for the whole horizon.
pub fn feasible_actions(
    ego: &VesselState,
    clusters: &[ObstacleCluster],
    grid: &ActionGrid,
    params: &PlanParams,
) -> FeasibilityMask {
    FeasibilityMask {
        headings: grid.heading_deltas.len(),
        speeds: grid.speed_factors.len(),
        feasible: grid
            .actions()
            .map(|a| clearance_for(ego, &a, clusters, params) >= params.d_safe)
            .collect(),
        horizon: params.horizon,
    }
}

/// Objective vectors for the feasible actions, in grid order.
pub fn score_actions(
    ego: &VesselState,
    clusters: &[ObstacleCluster],
    goal: Vec2,
    grid: &ActionGrid,
    mask: &FeasibilityMask,
    params: &PlanParams,
) -> Vec<(Action, ObjectiveVector)> {
    let goal_bearing = (goal - ego.position).bearing();
    let give_way = clusters.iter().any(|c| {
        classify_encounter(ego, &c.representative, &params.thresholds).requires_starboard()
    });

    grid.actions()
        .zip(&mask.feasible)
        .filter(|(_, &ok)| ok)
        .map(|(a, _)| {
            let clearance = clearance_for(ego, &a, clusters, params);
            let objectives = ObjectiveVector {
                goal_deviation: wrap_pi(ego.heading + a.heading_delta - goal_bearing).abs(),
                speed_penalty: 1.0 - a.speed_factor,
                clearance_deficit: (params.thresholds.dcpa_gate - clearance).max(0.0),
                colregs_penalty: if give_way && a.heading_delta < 0.0 {
                    1.0
                } else {
                    0.0
                },
            };
            (a, objectives)
        })
        .collect()
}
