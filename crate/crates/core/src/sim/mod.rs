//! Deterministic scenario simulation.
//!
//! [`run_scenario`] steps the ego vessel and scripted obstacles at a fixed
//! rate and calls the planner every decision period. [`monte_carlo`] runs
//! seeded batches of random scenarios, [`replay_ais`] drives obstacles from
//! recorded AIS traces, and [`synthetic_lidar`] renders labelled point clouds
//! for the perception-in-the-loop mode.

mod ais;
mod config;
mod lidar;
mod montecarlo;
mod obstacle;
mod output;
mod run;

pub use ais::{ais_to_obstacles, read_ais_csv, replay_ais, AisRecord};
pub use config::{
    EgoSpec, LidarConfig, MonteCarloParams, ObstacleSpec, PlannerMode, ScenarioConfig, TracePoint,
    TrackingConfig,
};
pub use lidar::{random_box_scene, synthetic_lidar, Hull};
pub use montecarlo::{generate_scenario, monte_carlo, LatencySummary, MonteCarloReport};
pub use obstacle::obstacle_state_at;
pub use output::{write_metrics_csv, write_trajectory_jsonl};
pub use run::{run_scenario, Outcome, RiskDiagnostics, RunMetrics, RunOutput, TrajectoryRow};
