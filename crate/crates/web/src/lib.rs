//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Each export takes and returns JSON strings. The `*_json` functions hold
//! the logic and are tested natively.

use asv_core::perception::Segmenter;
use asv_core::planner::{plan, PlanResult};
use asv_core::sim::{
    obstacle_state_at, random_box_scene, run_scenario, synthetic_lidar, Hull, LidarConfig,
    RunOutput, ScenarioConfig,
};
use asv_core::tracking::Track;
use asv_core::{Error, Result, Vec2, VesselState};
use serde::Serialize;
use wasm_bindgen::prelude::*;
use web_time::Instant;

#[derive(Serialize)]
struct SegmentView {
    hulls: Vec<Hull>,
    /// East, north, segment label (0 for unlabeled cells).
    points: Vec<(f64, f64, u32)>,
    detections: Vec<asv_core::perception::Detection>,
    elapsed_ms: f64,
}

/// Synthetic LiDAR sweep of `objects` random boxes, segmented.
pub fn segment_json(seed: u64, objects: usize, max_range: f64) -> Result<String> {
    if !(max_range > 6.0 && max_range.is_finite()) {
        return Err(Error::validation("max_range", "must exceed 6 m"));
    }
    let config = LidarConfig {
        max_range: max_range.max(20.0),
        ..LidarConfig::default()
    };
    let hulls = random_box_scene(seed, objects, max_range);
    let ego = VesselState::new(Vec2::ZERO, 0.0, 0.0);
    let cloud = synthetic_lidar(&ego, &hulls, &config, 1.0, seed)?;
    let segmenter = Segmenter::new(config.geometry()?, Default::default())?;
    let started = Instant::now();
    let out = segmenter.run(&cloud, 0.0);
    let elapsed_ms = started.elapsed().as_secs_f64() * 1e3;
    let points = out
        .image
        .cells()
        .iter()
        .zip(&out.labeling.labels)
        .filter_map(|(c, &l)| c.map(|c| (c.xyz[0], c.xyz[1], l)))
        .collect();
    Ok(to_json(&SegmentView {
        hulls,
        points,
        detections: out.detections,
        elapsed_ms,
    }))
}

#[derive(Serialize)]
struct PlanView {
    ego: VesselState,
    obstacles: Vec<VesselState>,
    plan: PlanResult,
}

/// One planner decision for the scenario's obstacles at time `t`, with the
/// ego at its configured start and any heading override in degrees.
pub fn plan_json(config: &str, t: f64, ego_heading_deg: Option<f64>) -> Result<String> {
    let config = ScenarioConfig::from_json(config)?;
    if !t.is_finite() {
        return Err(Error::validation("time", "must be finite"));
    }
    let mut ego = config.ego.state().with_timestamp(t);
    if let Some(h) = ego_heading_deg {
        ego.heading = h.to_radians();
    }
    let obstacles: Vec<VesselState> = config
        .obstacles
        .iter()
        .map(|o| obstacle_state_at(o, t))
        .collect();
    let tracks: Vec<Track> = obstacles
        .iter()
        .enumerate()
        .map(|(i, s)| Track::from_state(i as u64 + 1, s))
        .collect();
    let plan = plan(&ego, &tracks, config.goal, &config.planner_params());
    Ok(to_json(&PlanView {
        ego,
        obstacles,
        plan,
    }))
}

/// Full closed-loop run with the trajectory recorded.
pub fn simulate_json(config: &str) -> Result<String> {
    let config = ScenarioConfig::from_json(config)?;
    let out: RunOutput = run_scenario(&config, true)?;
    Ok(to_json(&out))
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("serializable")
}

fn js_err(e: Error) -> JsValue {
    JsValue::from_str(&e.to_string())
}

#[wasm_bindgen]
pub fn segment(seed: u32, objects: u32, max_range: f64) -> std::result::Result<String, JsValue> {
    segment_json(seed as u64, objects as usize, max_range).map_err(js_err)
}

#[wasm_bindgen]
pub fn plan_at(
    config: &str,
    t: f64,
    ego_heading_deg: Option<f64>,
) -> std::result::Result<String, JsValue> {
    plan_json(config, t, ego_heading_deg).map_err(js_err)
}

#[wasm_bindgen]
pub fn simulate(config: &str) -> std::result::Result<String, JsValue> {
    simulate_json(config).map_err(js_err)
}
