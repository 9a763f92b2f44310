use super::config::ObstacleSpec;
use crate::world::{Vec2, VesselState};

/// Ground-truth state of a scripted obstacle at simulated time `t`.
pub fn obstacle_state_at(spec: &ObstacleSpec, t: f64) -> VesselState {
    match spec {
        ObstacleSpec::ConstantVelocity {
            position,
            course,
            speed,
            ..
        } => {
            let p = *position + Vec2::from_heading(*course) * (speed * t);
            VesselState::new(p, *course, *speed)
        }
        ObstacleSpec::Waypoints {
            waypoints, speed, ..
        } => waypoint_state(waypoints, *speed, t),
        ObstacleSpec::Trace { points, .. } => {
            let first = &points[0];
            let last = &points[points.len() - 1];
            if t <= first.t || points.len() == 1 {
                return VesselState::new(first.position, 0.0, 0.0);
            }
            if t >= last.t {
                return VesselState::new(last.position, 0.0, 0.0);
            }
            let k = points.partition_point(|p| p.t <= t) - 1;
            let (a, b) = (&points[k], &points[k + 1]);
            let u = (t - a.t) / (b.t - a.t);
            let p = a.position + (b.position - a.position) * u;
            VesselState::from_velocity(p, (b.position - a.position) * (1.0 / (b.t - a.t)))
        }
    }
    .with_timestamp(t)
}

fn waypoint_state(waypoints: &[Vec2], speed: f64, t: f64) -> VesselState {
    let mut remaining = (speed * t).max(0.0);
    let mut heading = 0.0;
    for w in waypoints.windows(2) {
        let leg = w[1] - w[0];
        let len = leg.norm();
        if len == 0.0 {
            continue;
        }
        heading = leg.bearing();
        if remaining < len {
            return VesselState::new(w[0] + leg * (remaining / len), heading, speed);
        }
        remaining -= len;
    }
    VesselState::new(waypoints[waypoints.len() - 1], heading, 0.0)
}
