use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::config::LidarConfig;
use crate::error::Result;
use crate::perception::PointCloud;
use crate::rng::{noise_rng, SplitMix64};
use crate::world::{Vec2, VesselState, TAU};

/// Rectangular hull standing on the water: `extent = [length, width]` with
/// the length along `heading`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hull {
    pub position: Vec2,
    #[serde(rename = "heading_deg", with = "crate::serde_deg")]
    pub heading: f64,
    pub extent: [f64; 2],
}

/// Ray-casts every (ring, azimuth-bin centre) against the hulls and the
/// water plane `sensor_height` below the sensor. Hits on hull `k` are
/// labelled `k + 1`, water and nothing else `0`. Rays that hit nothing
/// within `max_range` produce no point.
pub fn synthetic_lidar(
    ego: &VesselState,
    hulls: &[Hull],
    config: &LidarConfig,
    sensor_height: f64,
    seed: u64,
) -> Result<PointCloud> {
    let geometry = config.geometry()?;
    let forward = Vec2::from_heading(ego.heading);
    let left = Vec2::new(-forward.north, forward.east);

    // Hulls in the sensor frame: centre, cos/sin of the length axis.
    let local: Vec<([f64; 2], f64, f64, [f64; 2])> = hulls
        .iter()
        .filter(|h| {
            h.position.distance(ego.position) <= config.max_range + h.extent[0] + h.extent[1]
        })
        .map(|h| {
            let rel = h.position - ego.position;
            let axis = Vec2::from_heading(h.heading);
            let yaw = axis.dot(left).atan2(axis.dot(forward));
            (
                [rel.dot(forward), rel.dot(left)],
                yaw.cos(),
                yaw.sin(),
                h.extent,
            )
        })
        .collect();
    let labels_of: Vec<u32> = hulls
        .iter()
        .enumerate()
        .filter(|(_, h)| {
            h.position.distance(ego.position) <= config.max_range + h.extent[0] + h.extent[1]
        })
        .map(|(k, _)| k as u32 + 1)
        .collect();

    let z_low = -sensor_height;
    let z_high = -sensor_height + config.hull_height;
    let noise = (config.range_noise > 0.0)
        .then(|| Normal::new(0.0, config.range_noise).expect("finite std"));
    let mut rng = noise_rng(seed, 0);

    let res = geometry.azimuth_resolution();
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for &el in geometry.ring_elevations() {
        let (sin_el, cos_el) = el.sin_cos();
        for col in 0..geometry.cols() {
            let az = (col as f64 + 0.5) * res;
            let d = [cos_el * az.cos(), cos_el * az.sin(), sin_el];

            let mut best = f64::INFINITY;
            let mut label = 0;
            if d[2] < 0.0 {
                best = z_low / d[2];
            }
            for (hull, &l) in local.iter().zip(&labels_of) {
                if let Some(t) = ray_box(d, hull, z_low, z_high) {
                    if t < best {
                        best = t;
                        label = l;
                    }
                }
            }
            if best > config.max_range {
                continue;
            }
            let mut r = best;
            if let Some(n) = &noise {
                r = (r + n.sample(&mut rng)).max(1e-3);
            }
            points.push([d[0] * r, d[1] * r, d[2] * r]);
            labels.push(label);
        }
    }
    PointCloud::new(points, Some(labels))
}

/// Slab test for a ray from the origin; nearest positive entry distance.
fn ray_box(
    d: [f64; 3],
    hull: &([f64; 2], f64, f64, [f64; 2]),
    z_low: f64,
    z_high: f64,
) -> Option<f64> {
    let (c, cos, sin, extent) = hull;
    // Ray origin and direction in the hull frame.
    let o = [-c[0] * cos - c[1] * sin, c[0] * sin - c[1] * cos, 0.0];
    let dl = [d[0] * cos + d[1] * sin, -d[0] * sin + d[1] * cos, d[2]];
    let lo = [-0.5 * extent[0], -0.5 * extent[1], z_low];
    let hi = [0.5 * extent[0], 0.5 * extent[1], z_high];
    let mut t_near = f64::NEG_INFINITY;
    let mut t_far = f64::INFINITY;
    for axis in 0..3 {
        if dl[axis] == 0.0 {
            if o[axis] < lo[axis] || o[axis] > hi[axis] {
                return None;
            }
            continue;
        }
        let a = (lo[axis] - o[axis]) / dl[axis];
        let b = (hi[axis] - o[axis]) / dl[axis];
        t_near = t_near.max(a.min(b));
        t_far = t_far.min(a.max(b));
    }
    (t_near <= t_far && t_near > 0.0).then_some(t_near)
}

/// `count` default-size hulls scattered around a sensor at the origin
/// facing north, between 6 m and `max_range` away, centres at least 8 m
/// apart. Placement gives up on a hull after 1000 rejected draws.
pub fn random_box_scene(seed: u64, count: usize, max_range: f64) -> Vec<Hull> {
    let mut rng = SplitMix64::new(seed);
    let mut hulls: Vec<Hull> = Vec::with_capacity(count);
    for _ in 0..count {
        for _ in 0..1000 {
            let range = rng.uniform(6.0, max_range);
            let bearing = rng.uniform(0.0, TAU);
            let heading = rng.uniform(0.0, TAU);
            let position = Vec2::from_heading(bearing) * range;
            if hulls.iter().all(|h| h.position.distance(position) >= 8.0) {
                hulls.push(Hull {
                    position,
                    heading,
                    extent: [3.0, 1.5],
                });
                break;
            }
        }
    }
    hulls
}
