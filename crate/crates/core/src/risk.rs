//! Pairwise encounter geometry: closest point of approach, COLREGs encounter
//! classification, the risk vector and single-obstacle avoidance.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Error, Result};
use crate::world::{normalize_angle, wrap_pi, Action, Vec2, VesselState};

/// Relative speeds below this are treated as zero.
const MIN_RELATIVE_SPEED: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CpaResult {
    /// Distance at closest approach, metres.
    pub dcpa: f64,
    /// Time to closest approach, seconds; zero when the range is opening.
    pub tcpa: f64,
    pub cpa_point_ego: Vec2,
    pub cpa_point_obstacle: Vec2,
}

/// Closest point of approach for two vessels holding their velocities.
pub fn compute_cpa(ego: &VesselState, obstacle: &VesselState) -> CpaResult {
    cpa_from_motion(
        ego.position,
        ego.velocity(),
        obstacle.position,
        obstacle.velocity(),
    )
}

pub(crate) fn cpa_from_motion(p_ego: Vec2, v_ego: Vec2, p_obs: Vec2, v_obs: Vec2) -> CpaResult {
    let p = p_obs - p_ego;
    let v = v_obs - v_ego;
    let vv = v.norm_sq();
    let tcpa = if vv.sqrt() < MIN_RELATIVE_SPEED {
        0.0
    } else {
        (-p.dot(v) / vv).max(0.0)
    };
    CpaResult {
        dcpa: (p + v * tcpa).norm(),
        tcpa,
        cpa_point_ego: p_ego + v_ego * tcpa,
        cpa_point_obstacle: p_obs + v_obs * tcpa,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EncounterType {
    HeadOn,
    CrossingGiveWay,
    CrossingStandOn,
    Overtaking,
    Overtaken,
    Safe,
}

impl EncounterType {
    /// Encounters in which COLREGs require the ego vessel to alter to starboard.
    pub fn requires_starboard(self) -> bool {
        matches!(self, EncounterType::HeadOn | EncounterType::CrossingGiveWay)
    }
}

/// CPA gates, encounter sectors and risk weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CpaThresholds {
    pub dcpa_gate: f64,
    pub tcpa_gate: f64,
    /// Half-width of the head-on cone, radians.
    #[serde(rename = "head_on_half_angle_deg", with = "crate::serde_deg")]
    pub head_on_half_angle: f64,
    /// Relative bearing beyond which a vessel is astern ("abaft the beam" sector).
    #[serde(rename = "overtaking_sector_deg", with = "crate::serde_deg")]
    pub overtaking_sector: f64,
    pub weight_dcpa: f64,
    pub weight_tcpa: f64,
}

impl Default for CpaThresholds {
    fn default() -> Self {
        Self {
            dcpa_gate: 50.0,
            tcpa_gate: 120.0,
            head_on_half_angle: 15f64.to_radians(),
            overtaking_sector: 112.5f64.to_radians(),
            weight_dcpa: 0.6,
            weight_tcpa: 0.4,
        }
    }
}

impl CpaThresholds {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("dcpa_gate", self.dcpa_gate)?;
        ensure_positive("tcpa_gate", self.tcpa_gate)?;
        ensure_positive("head_on_half_angle_deg", self.head_on_half_angle)?;
        ensure_positive("overtaking_sector_deg", self.overtaking_sector)?;
        if self.weight_dcpa < 0.0
            || self.weight_tcpa < 0.0
            || ((self.weight_dcpa + self.weight_tcpa) - 1.0).abs() > 1e-9
        {
            return Err(Error::validation(
                "weight_dcpa",
                "risk weights must be non-negative and sum to 1",
            ));
        }
        Ok(())
    }
}

/// Bearing of `other` from `own`'s bow in `(-π, π]`, positive to starboard.
pub fn relative_bearing(own: &VesselState, other: &VesselState) -> f64 {
    wrap_pi((other.position - own.position).bearing() - own.heading)
}

fn is_safe(cpa: &CpaResult, ego: &VesselState, obstacle: &VesselState, th: &CpaThresholds) -> bool {
    let p = obstacle.position - ego.position;
    let v = obstacle.velocity() - ego.velocity();
    let closing = p.dot(v) < 0.0 && v.norm() >= MIN_RELATIVE_SPEED;
    cpa.dcpa > th.dcpa_gate || cpa.tcpa > th.tcpa_gate || (cpa.tcpa == 0.0 && !closing)
}

/// Classifies the encounter from the ego vessel's point of view.
///
/// Head-on is tested first, then overtaking/overtaken, then crossing.
pub fn classify_encounter(
    ego: &VesselState,
    obstacle: &VesselState,
    gate: &CpaThresholds,
) -> EncounterType {
    let cpa = compute_cpa(ego, obstacle);
    if is_safe(&cpa, ego, obstacle, gate) {
        return EncounterType::Safe;
    }
    let beta = relative_bearing(ego, obstacle);
    let beta_from_obstacle = relative_bearing(obstacle, ego);
    let heading_diff = normalize_angle(obstacle.heading - ego.heading);
    let pi = std::f64::consts::PI;

    if beta.abs() <= gate.head_on_half_angle && (heading_diff - pi).abs() <= gate.head_on_half_angle
    {
        EncounterType::HeadOn
    } else if beta_from_obstacle.abs() > gate.overtaking_sector && ego.speed > obstacle.speed {
        EncounterType::Overtaking
    } else if beta.abs() > gate.overtaking_sector && obstacle.speed > ego.speed {
        EncounterType::Overtaken
    } else if beta > 0.0 && beta < gate.overtaking_sector {
        EncounterType::CrossingGiveWay
    } else {
        EncounterType::CrossingStandOn
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskVector {
    /// Collision risk in `[0, 1]`.
    pub magnitude: f64,
    /// Compass bearing from the ego CPA position to the obstacle CPA position.
    pub direction: f64,
}

fn risk_magnitude(cpa: &CpaResult, th: &CpaThresholds) -> f64 {
    let d = (1.0 - cpa.dcpa / th.dcpa_gate).max(0.0);
    let t = (1.0 - cpa.tcpa / th.tcpa_gate).max(0.0);
    (th.weight_dcpa * d + th.weight_tcpa * t).clamp(0.0, 1.0)
}

/// Risk vector of an obstacle: a DCPA/TCPA blend pointing at the threat's
/// position at closest approach. Zero for safe geometries.
pub fn risk_vector(
    ego: &VesselState,
    obstacle: &VesselState,
    thresholds: &CpaThresholds,
) -> RiskVector {
    let cpa = compute_cpa(ego, obstacle);
    let offset = cpa.cpa_point_obstacle - cpa.cpa_point_ego;
    let direction = if offset.norm() > 0.0 {
        offset.bearing()
    } else {
        (obstacle.position - ego.position).bearing()
    };
    let magnitude = if is_safe(&cpa, ego, obstacle, thresholds) {
        0.0
    } else {
        risk_magnitude(&cpa, thresholds)
    };
    RiskVector {
        magnitude,
        direction,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AvoidParams {
    pub thresholds: CpaThresholds,
    /// Risk magnitude above which avoidance engages.
    pub activation: f64,
    /// A stand-on vessel manoeuvres only above this risk.
    pub stand_on_exception: f64,
    #[serde(rename = "heading_step_deg", with = "crate::serde_deg")]
    pub heading_step: f64,
    #[serde(rename = "max_heading_deg", with = "crate::serde_deg")]
    pub max_heading: f64,
    /// Speed factors tried in order; the first is the nominal speed.
    pub speed_ladder: Vec<f64>,
    pub nominal_speed: f64,
}

impl Default for AvoidParams {
    fn default() -> Self {
        Self {
            thresholds: CpaThresholds::default(),
            activation: 0.1,
            stand_on_exception: 0.8,
            heading_step: 5f64.to_radians(),
            max_heading: 90f64.to_radians(),
            speed_ladder: vec![1.0, 0.8, 0.6, 0.4, 0.2],
            nominal_speed: 5.0,
        }
    }
}

/// Heads for `goal` at full speed, turning at most 90° per command.
pub fn steer_to_goal(ego: &VesselState, goal: Vec2) -> Action {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let delta = wrap_pi((goal - ego.position).bearing() - ego.heading).clamp(-half_pi, half_pi);
    Action {
        heading_delta: delta,
        speed_factor: 1.0,
    }
}

/// Single-obstacle avoidance.
///
/// Below the activation risk the vessel steers for the goal. Otherwise it
/// takes the smallest heading change (starboard first) at the highest speed
/// on the ladder that opens the predicted DCPA to the gate. Head-on and
/// give-way crossings only consider starboard turns; a stand-on vessel holds
/// course until risk exceeds `stand_on_exception`.
pub fn avoid_single(
    ego: &VesselState,
    obstacle: &VesselState,
    goal: Vec2,
    params: &AvoidParams,
) -> Action {
    let th = &params.thresholds;
    let risk = risk_vector(ego, obstacle, th);
    if risk.magnitude <= params.activation {
        return steer_to_goal(ego, goal);
    }
    let encounter = classify_encounter(ego, obstacle, th);
    if encounter == EncounterType::CrossingStandOn && risk.magnitude <= params.stand_on_exception {
        return Action::HOLD;
    }
    let port_allowed = !encounter.requires_starboard();
    let steps = (params.max_heading / params.heading_step).round().max(0.0) as usize;

    for &speed_factor in &params.speed_ladder {
        let speed = params.nominal_speed * speed_factor;
        for k in 0..=steps {
            let magnitude = k as f64 * params.heading_step;
            let mut candidates = vec![magnitude];
            if port_allowed && k > 0 {
                candidates.push(-magnitude);
            }
            for delta in candidates {
                let velocity = Vec2::from_heading(ego.heading + delta) * speed;
                let cpa = cpa_from_motion(
                    ego.position,
                    velocity,
                    obstacle.position,
                    obstacle.velocity(),
                );
                if cpa.dcpa >= th.dcpa_gate {
                    return Action {
                        heading_delta: delta,
                        speed_factor,
                    };
                }
            }
        }
    }
    let slowest = params.speed_ladder.iter().copied().fold(1.0, f64::min);
    Action {
        heading_delta: params.max_heading,
        speed_factor: slowest,
    }
}
