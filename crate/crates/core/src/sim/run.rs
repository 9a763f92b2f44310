use std::fmt;

use serde::{Deserialize, Serialize};
use web_time::Instant;

use super::config::{ObstacleSpec, PlannerMode, ScenarioConfig};
use super::lidar::{synthetic_lidar, Hull};
use super::obstacle::obstacle_state_at;
use crate::error::Result;
use crate::perception::Segmenter;
use crate::planner::{plan, PlanParams};
use crate::risk::{
    avoid_single, classify_encounter, compute_cpa, risk_vector, steer_to_goal, CpaThresholds,
    EncounterType,
};
use crate::rng::split;
use crate::tracking::{PhdTracker, Track};
use crate::world::{step_kinematics, wrap_pi, Action, Vec2, VesselState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Outcome {
    GoalReached,
    Collision,
    Timeout,
    DeadlockUnresolved,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::GoalReached => "GOAL_REACHED",
            Outcome::Collision => "COLLISION",
            Outcome::Timeout => "TIMEOUT",
            Outcome::DeadlockUnresolved => "DEADLOCK_UNRESOLVED",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub outcome: Outcome,
    /// Smallest ego-obstacle distance over all steps; infinite without obstacles.
    pub min_separation: f64,
    pub path_length: f64,
    /// Simulated seconds until termination.
    pub duration: f64,
    pub max_heading_alteration_deg: f64,
    /// Lowest commanded speed factor.
    pub min_speed_factor: f64,
    pub deadlock_events: u32,
    pub plan_calls: u32,
    /// Wall-clock time of every planner call, milliseconds. Not part of the
    /// deterministic output.
    #[serde(skip)]
    pub latencies_ms: Vec<f64>,
}

impl RunMetrics {
    pub fn mean_latency_ms(&self) -> f64 {
        if self.latencies_ms.is_empty() {
            0.0
        } else {
            self.latencies_ms.iter().sum::<f64>() / self.latencies_ms.len() as f64
        }
    }

    pub fn max_latency_ms(&self) -> f64 {
        self.latencies_ms.iter().copied().fold(0.0, f64::max)
    }
}

/// Highest-risk ground-truth obstacle at the last decision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskDiagnostics {
    pub obstacle: Option<usize>,
    pub magnitude: f64,
    #[serde(rename = "direction_deg", with = "crate::serde_deg")]
    pub direction: f64,
    pub encounter: EncounterType,
    pub dcpa: f64,
    pub tcpa: f64,
}

impl RiskDiagnostics {
    const NONE: RiskDiagnostics = RiskDiagnostics {
        obstacle: None,
        magnitude: 0.0,
        direction: 0.0,
        encounter: EncounterType::Safe,
        dcpa: f64::INFINITY,
        tcpa: 0.0,
    };
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub ego: VesselState,
    pub obstacles: Vec<VesselState>,
    /// Last commanded action.
    pub action: Action,
    pub deadlock: bool,
    pub risk: RiskDiagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunOutput {
    pub metrics: RunMetrics,
    /// One row per simulation step, empty unless requested.
    pub trajectory: Vec<TrajectoryRow>,
}

fn riskiest(ego: &VesselState, obstacles: &[VesselState], th: &CpaThresholds) -> RiskDiagnostics {
    let mut best = RiskDiagnostics::NONE;
    for (i, o) in obstacles.iter().enumerate() {
        let r = risk_vector(ego, o, th);
        if best.obstacle.is_none() || r.magnitude > best.magnitude {
            let cpa = compute_cpa(ego, o);
            best = RiskDiagnostics {
                obstacle: Some(i),
                magnitude: r.magnitude,
                direction: r.direction,
                encounter: classify_encounter(ego, o, th),
                dcpa: cpa.dcpa,
                tcpa: cpa.tcpa,
            };
        }
    }
    best
}

fn ground_truth_tracks(states: &[VesselState], skip: Option<usize>) -> Vec<Track> {
    states
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != skip)
        .map(|(i, s)| Track::from_state(i as u64 + 1, s))
        .collect()
}

/// A constant-velocity obstacle that runs the planner toward a point far
/// along its initial course.
struct Reactive {
    index: usize,
    goal: Vec2,
    params: PlanParams,
    target_heading: f64,
    speed_factor: f64,
}

struct Pipeline {
    segmenter: Segmenter,
    tracker: PhdTracker,
}

/// Runs one scenario to termination.
///
/// Every `decision_period` the planner (or the single-obstacle rule, or
/// plain goal steering) picks an action; the commanded heading is held as an
/// absolute target until the next decision while the first-order dynamics
/// close the gap each `sim_step`. Collision is checked before goal arrival
/// at every step.
pub fn run_scenario(config: &ScenarioConfig, record_trajectory: bool) -> Result<RunOutput> {
    config.validate()?;
    let dt = config.sim_step;
    let decision_steps = ((config.decision_period / dt).round() as u64).max(1);
    let max_steps = (config.max_duration / dt - 1e-9).ceil() as u64;
    let plan_params = config.planner_params();
    let avoid_params = config.avoid_params();
    let thresholds = &plan_params.thresholds;
    let half_pi = std::f64::consts::FRAC_PI_2;

    let mut pipeline = if config.pipeline {
        Some(Pipeline {
            segmenter: Segmenter::new(config.lidar.geometry()?, config.segment.clone())?,
            tracker: PhdTracker::new(config.tracking.phd.clone())?,
        })
    } else {
        None
    };

    let mut reactive: Vec<Reactive> = Vec::new();
    if config.reactive_obstacles {
        for (index, spec) in config.obstacles.iter().enumerate() {
            if let ObstacleSpec::ConstantVelocity {
                position,
                course,
                speed,
                ..
            } = spec
            {
                if *speed > 0.0 {
                    let reach = speed * config.max_duration + 1000.0;
                    reactive.push(Reactive {
                        index,
                        goal: *position + Vec2::from_heading(*course) * reach,
                        params: PlanParams {
                            nominal_speed: *speed,
                            ..plan_params.clone()
                        },
                        target_heading: *course,
                        speed_factor: 1.0,
                    });
                }
            }
        }
    }

    let start = config.ego.state();
    let mut ego = start;
    let mut obstacles: Vec<VesselState> = config
        .obstacles
        .iter()
        .map(|o| obstacle_state_at(o, 0.0))
        .collect();
    let mut action = Action::HOLD;
    let mut target_heading = ego.heading;
    let mut deadlock = false;
    let mut deadlock_since: Option<f64> = None;
    let mut risk = RiskDiagnostics::NONE;

    let mut metrics = RunMetrics {
        outcome: Outcome::Timeout,
        min_separation: f64::INFINITY,
        path_length: 0.0,
        duration: 0.0,
        max_heading_alteration_deg: 0.0,
        min_speed_factor: 1.0,
        deadlock_events: 0,
        plan_calls: 0,
        latencies_ms: Vec::new(),
    };
    let mut trajectory = Vec::new();
    let mut step: u64 = 0;

    loop {
        let t = step as f64 * dt;
        let separation = obstacles
            .iter()
            .map(|o| o.position.distance(ego.position))
            .fold(f64::INFINITY, f64::min);
        metrics.min_separation = metrics.min_separation.min(separation);
        metrics.max_heading_alteration_deg = metrics
            .max_heading_alteration_deg
            .max(wrap_pi(ego.heading - start.heading).abs().to_degrees());

        let mut outcome = if separation < config.collision_radius {
            Some(Outcome::Collision)
        } else if ego.position.distance(config.goal) <= config.goal_radius {
            Some(Outcome::GoalReached)
        } else if step >= max_steps {
            Some(Outcome::Timeout)
        } else {
            None
        };

        if outcome.is_none() && step.is_multiple_of(decision_steps) {
            let decision = step / decision_steps;
            if record_trajectory || config.mode == PlannerMode::Single {
                risk = riskiest(&ego, &obstacles, thresholds);
            }
            let tracks = match &mut pipeline {
                Some(p) => {
                    let hulls: Vec<Hull> = obstacles
                        .iter()
                        .zip(&config.obstacles)
                        .map(|(s, spec)| Hull {
                            position: s.position,
                            heading: s.heading,
                            extent: spec.extent(),
                        })
                        .collect();
                    let cloud = synthetic_lidar(
                        &ego,
                        &hulls,
                        &config.lidar,
                        config.segment.sensor_height,
                        split(config.rng_seed, decision),
                    )?;
                    let detections: Vec<_> = p
                        .segmenter
                        .run(&cloud, t)
                        .detections
                        .iter()
                        .map(|d| d.to_world(&ego))
                        .collect();
                    p.tracker.params.birth_components =
                        config.tracking.birth.components(ego.position);
                    p.tracker.step(&detections, t)?.to_vec()
                }
                None => ground_truth_tracks(&obstacles, None),
            };

            match config.mode {
                PlannerMode::Pareto => {
                    let started = Instant::now();
                    let result = plan(&ego, &tracks, config.goal, &plan_params);
                    metrics
                        .latencies_ms
                        .push(started.elapsed().as_secs_f64() * 1e3);
                    metrics.plan_calls += 1;
                    action = result.action;
                    deadlock = result.deadlock;
                }
                PlannerMode::Single => {
                    let started = Instant::now();
                    let tracked: Vec<VesselState> = tracks.iter().map(|tr| tr.to_state()).collect();
                    let threat = riskiest(&ego, &tracked, thresholds);
                    action = match threat.obstacle {
                        Some(i) => avoid_single(&ego, &tracked[i], config.goal, &avoid_params),
                        None => steer_to_goal(&ego, config.goal),
                    };
                    metrics
                        .latencies_ms
                        .push(started.elapsed().as_secs_f64() * 1e3);
                    metrics.plan_calls += 1;
                    deadlock = false;
                }
                PlannerMode::Disabled => {
                    action = steer_to_goal(&ego, config.goal);
                    deadlock = false;
                }
            }
            target_heading = ego.heading + action.heading_delta;
            metrics.min_speed_factor = metrics.min_speed_factor.min(action.speed_factor);

            if deadlock {
                metrics.deadlock_events += 1;
                let since = *deadlock_since.get_or_insert(t);
                if t - since > config.deadlock_timeout {
                    outcome = Some(Outcome::DeadlockUnresolved);
                }
            } else {
                deadlock_since = None;
            }

            for r in &mut reactive {
                let own = obstacles[r.index];
                let mut others = ground_truth_tracks(&obstacles, Some(r.index));
                others.push(Track::from_state(0, &ego));
                let result = plan(&own, &others, r.goal, &r.params);
                r.target_heading = own.heading + result.action.heading_delta;
                r.speed_factor = result.action.speed_factor;
            }
        }

        if record_trajectory {
            trajectory.push(TrajectoryRow {
                t,
                ego,
                obstacles: obstacles.clone(),
                action,
                deadlock,
                risk,
            });
        }
        if let Some(o) = outcome {
            metrics.outcome = o;
            metrics.duration = t;
            break;
        }

        let command = Action {
            heading_delta: wrap_pi(target_heading - ego.heading).clamp(-half_pi, half_pi),
            speed_factor: action.speed_factor,
        };
        let next = step_kinematics(&ego, &command, config.nominal_speed, dt, &config.dynamics)?;
        metrics.path_length += next.position.distance(ego.position);
        ego = next;

        step += 1;
        let t_next = step as f64 * dt;
        let mut next_obstacles: Vec<VesselState> = config
            .obstacles
            .iter()
            .map(|o| obstacle_state_at(o, t_next))
            .collect();
        for r in &reactive {
            let own = obstacles[r.index];
            let command = Action {
                heading_delta: wrap_pi(r.target_heading - own.heading).clamp(-half_pi, half_pi),
                speed_factor: r.speed_factor,
            };
            next_obstacles[r.index] =
                step_kinematics(&own, &command, r.params.nominal_speed, dt, &config.dynamics)?;
        }
        obstacles = next_obstacles;
    }

    Ok(RunOutput {
        metrics,
        trajectory,
    })
}
