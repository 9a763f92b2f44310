//! Perception, tracking, collision avoidance and scenario simulation for
//! autonomous surface vehicles.
//!
//! The crate is organised along the autonomy pipeline:
//!
//! * [`perception`]: LiDAR range-image segmentation into obstacle detections.
//! * [`tracking`]: GM-PHD multi-target filtering of detections into tracks.
//! * [`risk`]: closest-point-of-approach geometry, COLREGs encounter
//!   classification, risk vectors and single-obstacle avoidance.
//! * [`planner`]: multi-obstacle avoidance over a discrete action grid with
//!   Pareto selection.
//! * [`sim`]: deterministic scenario runner, Monte Carlo batches and AIS replay.

pub mod error;
pub mod perception;
pub mod planner;
pub mod risk;
pub mod rng;
mod serde_deg;
pub mod sim;
pub mod tracking;
pub mod world;

pub use error::{Error, Result};
pub use world::{Action, DynamicsParams, GeoOrigin, Vec2, VesselState};
