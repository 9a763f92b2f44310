//! Scenario configuration schema. Angles are degrees in JSON (`*_deg`
//! fields) and radians in memory.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::perception::{SegmentParams, SensorGeometry};
use crate::planner::PlanParams;
use crate::risk::AvoidParams;
use crate::tracking::{BirthRing, PhdParams};
use crate::world::{DynamicsParams, GeoOrigin, Vec2, VesselState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EgoSpec {
    pub position: Vec2,
    #[serde(rename = "heading_deg", with = "crate::serde_deg")]
    pub heading: f64,
    pub speed: f64,
}

impl EgoSpec {
    pub fn state(&self) -> VesselState {
        VesselState::new(self.position, self.heading, self.speed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TracePoint {
    /// Seconds of simulated time.
    pub t: f64,
    pub position: Vec2,
}

fn default_extent() -> [f64; 2] {
    [3.0, 1.5]
}

/// A scripted obstacle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObstacleSpec {
    ConstantVelocity {
        position: Vec2,
        #[serde(rename = "course_deg", with = "crate::serde_deg")]
        course: f64,
        speed: f64,
        /// Hull `[length, width]`, metres.
        #[serde(default = "default_extent")]
        extent: [f64; 2],
    },
    /// Follows the polyline at constant speed and stops at the last point.
    Waypoints {
        waypoints: Vec<Vec2>,
        speed: f64,
        #[serde(default = "default_extent")]
        extent: [f64; 2],
    },
    /// Piecewise-linear positions over time, held constant outside the span.
    Trace {
        points: Vec<TracePoint>,
        #[serde(default = "default_extent")]
        extent: [f64; 2],
    },
}

impl ObstacleSpec {
    pub fn extent(&self) -> [f64; 2] {
        match self {
            ObstacleSpec::ConstantVelocity { extent, .. }
            | ObstacleSpec::Waypoints { extent, .. }
            | ObstacleSpec::Trace { extent, .. } => *extent,
        }
    }

    fn validate(&self, idx: usize) -> Result<()> {
        let field = |name: &str| format!("obstacles[{idx}].{name}");
        let check = |name: &str, v: f64| ensure_finite(&field(name), v);
        match self {
            ObstacleSpec::ConstantVelocity {
                position,
                course,
                speed,
                ..
            } => {
                check("position.east", position.east)?;
                check("position.north", position.north)?;
                check("course_deg", *course)?;
                check("speed", *speed)?;
                if *speed < 0.0 {
                    return Err(Error::validation(field("speed"), "must be >= 0"));
                }
            }
            ObstacleSpec::Waypoints {
                waypoints, speed, ..
            } => {
                if waypoints.is_empty() {
                    return Err(Error::validation(
                        field("waypoints"),
                        "needs at least one point",
                    ));
                }
                if waypoints.iter().any(|w| !w.is_finite()) {
                    return Err(Error::validation(field("waypoints"), "must be finite"));
                }
                check("speed", *speed)?;
                if *speed < 0.0 {
                    return Err(Error::validation(field("speed"), "must be >= 0"));
                }
            }
            ObstacleSpec::Trace { points, .. } => {
                if points.is_empty() {
                    return Err(Error::validation(
                        field("points"),
                        "needs at least one point",
                    ));
                }
                if points
                    .iter()
                    .any(|p| !p.t.is_finite() || !p.position.is_finite())
                {
                    return Err(Error::validation(field("points"), "must be finite"));
                }
                if points.windows(2).any(|w| w[1].t <= w[0].t) {
                    return Err(Error::validation(
                        field("points"),
                        "times must be strictly increasing",
                    ));
                }
            }
        }
        let e = self.extent();
        if !(e[0] > 0.0 && e[1] > 0.0 && e[0].is_finite() && e[1].is_finite()) {
            return Err(Error::validation(field("extent"), "sides must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlannerMode {
    /// Multi-obstacle Pareto planner.
    Pareto,
    /// Single-obstacle avoidance against the highest-risk obstacle.
    Single,
    /// No avoidance: steer straight for the goal.
    Disabled,
}

/// Simulated LiDAR used when the perception pipeline is in the loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LidarConfig {
    pub rings: usize,
    #[serde(rename = "min_elevation_deg", with = "crate::serde_deg")]
    pub min_elevation: f64,
    #[serde(rename = "max_elevation_deg", with = "crate::serde_deg")]
    pub max_elevation: f64,
    pub azimuth_resolution_deg: f64,
    pub max_range: f64,
    /// Range noise standard deviation, metres.
    pub range_noise: f64,
    /// Hull height above the waterline, metres.
    pub hull_height: f64,
}

impl Default for LidarConfig {
    fn default() -> Self {
        Self {
            rings: 16,
            min_elevation: -15f64.to_radians(),
            max_elevation: 15f64.to_radians(),
            azimuth_resolution_deg: 0.2,
            max_range: 100.0,
            range_noise: 0.02,
            hull_height: 1.5,
        }
    }
}

impl LidarConfig {
    pub fn geometry(&self) -> Result<SensorGeometry> {
        let g = SensorGeometry::uniform(self.rings, self.min_elevation, self.max_elevation, 1)?;
        SensorGeometry::with_azimuth_resolution_deg(
            g.ring_elevations().to_vec(),
            self.azimuth_resolution_deg,
        )
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry()?;
        ensure_positive("lidar.max_range", self.max_range)?;
        ensure_finite("lidar.range_noise", self.range_noise)?;
        if self.range_noise < 0.0 {
            return Err(Error::validation("lidar.range_noise", "must be >= 0"));
        }
        ensure_positive("lidar.hull_height", self.hull_height)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackingConfig {
    /// Birth components are re-centred on the ego vessel every frame.
    pub birth: BirthRing,
    pub phd: PhdParams,
}

impl Default for TrackingConfig {
    fn default() -> Self {
        Self {
            birth: BirthRing::default(),
            phd: PhdParams {
                birth_components: Vec::new(),
                ..PhdParams::default()
            },
        }
    }
}

/// Random obstacle distribution for Monte Carlo batches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonteCarloParams {
    /// Centre of the square arena.
    pub arena_center: Vec2,
    /// Side length, metres.
    pub arena_size: f64,
    pub min_speed: f64,
    pub max_speed: f64,
    /// No obstacle starts closer than this to the ego start or the goal.
    pub exclusion_radius: f64,
}

impl Default for MonteCarloParams {
    fn default() -> Self {
        Self {
            arena_center: Vec2::ZERO,
            arena_size: 1000.0,
            min_speed: 1.0,
            max_speed: 6.0,
            exclusion_radius: 100.0,
        }
    }
}

fn d_goal_radius() -> f64 {
    10.0
}
fn d_nominal_speed() -> f64 {
    5.0
}
fn d_decision_period() -> f64 {
    1.0
}
fn d_sim_step() -> f64 {
    0.1
}
fn d_max_duration() -> f64 {
    600.0
}
fn d_collision_radius() -> f64 {
    5.0
}
fn d_deadlock_timeout() -> f64 {
    60.0
}
fn d_mode() -> PlannerMode {
    PlannerMode::Pareto
}

/// A complete, self-contained scenario. `rng_seed` has no default: every
/// random draw in a run is derived from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub ego: EgoSpec,
    pub goal: Vec2,
    #[serde(default = "d_goal_radius")]
    pub goal_radius: f64,
    /// m/s; overrides `planner.nominal_speed` and `avoid.nominal_speed` during a run.
    #[serde(default = "d_nominal_speed")]
    pub nominal_speed: f64,
    #[serde(default)]
    pub obstacles: Vec<ObstacleSpec>,
    /// Seconds between planner calls.
    #[serde(default = "d_decision_period")]
    pub decision_period: f64,
    /// Integration step, seconds.
    #[serde(default = "d_sim_step")]
    pub sim_step: f64,
    #[serde(default = "d_max_duration")]
    pub max_duration: f64,
    #[serde(default = "d_collision_radius")]
    pub collision_radius: f64,
    /// Continuous deadlock longer than this ends the run, seconds.
    #[serde(default = "d_deadlock_timeout")]
    pub deadlock_timeout: f64,
    #[serde(default = "d_mode")]
    pub mode: PlannerMode,
    /// Run LiDAR segmentation and GM-PHD tracking in the loop instead of
    /// feeding ground-truth obstacle states to the planner.
    #[serde(default)]
    pub pipeline: bool,
    /// Constant-velocity obstacles run the planner themselves.
    #[serde(default)]
    pub reactive_obstacles: bool,
    #[serde(default)]
    pub dynamics: DynamicsParams,
    #[serde(default)]
    pub planner: PlanParams,
    #[serde(default)]
    pub avoid: AvoidParams,
    #[serde(default)]
    pub lidar: LidarConfig,
    #[serde(default)]
    pub segment: SegmentParams,
    #[serde(default)]
    pub tracking: TrackingConfig,
    #[serde(default)]
    pub monte_carlo: MonteCarloParams,
    /// Geodetic anchor for AIS replay.
    #[serde(default)]
    pub origin: Option<GeoOrigin>,
    pub rng_seed: u64,
}

impl Default for ScenarioConfig {
    /// Ego crossing a 1 km arena from south to north in open water.
    fn default() -> Self {
        Self {
            ego: EgoSpec {
                position: Vec2::new(0.0, -450.0),
                heading: 0.0,
                speed: 5.0,
            },
            goal: Vec2::new(0.0, 450.0),
            goal_radius: d_goal_radius(),
            nominal_speed: d_nominal_speed(),
            obstacles: Vec::new(),
            decision_period: d_decision_period(),
            sim_step: d_sim_step(),
            max_duration: d_max_duration(),
            collision_radius: d_collision_radius(),
            deadlock_timeout: d_deadlock_timeout(),
            mode: d_mode(),
            pipeline: false,
            reactive_obstacles: false,
            dynamics: DynamicsParams::default(),
            planner: PlanParams::default(),
            avoid: AvoidParams::default(),
            lidar: LidarConfig::default(),
            segment: SegmentParams::default(),
            tracking: TrackingConfig::default(),
            monte_carlo: MonteCarloParams::default(),
            origin: None,
            rng_seed: 0,
        }
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ScenarioConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.ego.state().validate()?;
        if self.ego.speed < 0.0 {
            return Err(Error::validation("ego.speed", "must be >= 0"));
        }
        if !self.goal.is_finite() {
            return Err(Error::validation("goal", "must be finite"));
        }
        ensure_positive("goal_radius", self.goal_radius)?;
        ensure_positive("nominal_speed", self.nominal_speed)?;
        ensure_positive("decision_period", self.decision_period)?;
        ensure_positive("sim_step", self.sim_step)?;
        ensure_positive("max_duration", self.max_duration)?;
        ensure_positive("collision_radius", self.collision_radius)?;
        ensure_positive("deadlock_timeout", self.deadlock_timeout)?;
        if self.sim_step > self.decision_period {
            return Err(Error::validation(
                "sim_step",
                "must not exceed decision_period",
            ));
        }
        if self.collision_radius >= self.planner.d_safe {
            return Err(Error::validation(
                "collision_radius",
                format!(
                    "{} must be smaller than planner.d_safe {}",
                    self.collision_radius, self.planner.d_safe
                ),
            ));
        }
        for (i, o) in self.obstacles.iter().enumerate() {
            o.validate(i)?;
        }
        self.dynamics.validate()?;
        self.planner_params().validate()?;
        self.avoid.thresholds.validate()?;
        if self.pipeline {
            self.lidar.validate()?;
            self.segment.validate()?;
            self.tracking.phd.validate()?;
        }
        let mc = &self.monte_carlo;
        ensure_positive("monte_carlo.arena_size", mc.arena_size)?;
        ensure_finite("monte_carlo.min_speed", mc.min_speed)?;
        ensure_finite("monte_carlo.max_speed", mc.max_speed)?;
        if mc.min_speed < 0.0 || mc.max_speed < mc.min_speed {
            return Err(Error::validation(
                "monte_carlo.max_speed",
                "speed range must satisfy 0 <= min <= max",
            ));
        }
        ensure_finite("monte_carlo.exclusion_radius", mc.exclusion_radius)?;
        if let Some(o) = &self.origin {
            o.validate()?;
        }
        Ok(())
    }

    /// Planner parameters with the scenario's nominal speed applied.
    pub fn planner_params(&self) -> PlanParams {
        PlanParams {
            nominal_speed: self.nominal_speed,
            ..self.planner.clone()
        }
    }

    pub fn avoid_params(&self) -> AvoidParams {
        AvoidParams {
            nominal_speed: self.nominal_speed,
            ..self.avoid.clone()
        }
    }
}
