use serde::{Deserialize, Serialize};

use super::projection::RangeImage;
use super::segment::SegmentLabeling;
use crate::world::{normalize_angle, Vec2, VesselState};

/// Smallest reported box side, metres.
const MIN_EXTENT: f64 = 0.1;

/// A segmented obstacle. Perception reports it in the sensor frame
/// (`centroid = [x forward, y left]`); [`Detection::to_world`] rotates it into
/// the local east/north frame consumed by tracking.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub centroid: [f64; 2],
    /// `[length along the first axis, width along the second]`, metres.
    pub extent: [f64; 2],
    pub point_count: usize,
    pub timestamp: f64,
}

impl Detection {
    /// Converts a sensor-frame detection to east/north using the ego pose.
    pub fn to_world(&self, ego: &VesselState) -> Detection {
        let forward = Vec2::from_heading(ego.heading);
        let left = Vec2::new(-forward.north, forward.east);
        let p = ego.position + forward * self.centroid[0] + left * self.centroid[1];
        Detection {
            centroid: [p.east, p.north],
            ..*self
        }
    }

    fn azimuth(&self) -> f64 {
        normalize_angle(self.centroid[1].atan2(self.centroid[0]))
    }
}

/// One detection per segment with at least `min_segment_points` points,
/// largest first; equal sizes are ordered by centroid azimuth.
pub fn extract_detections(
    image: &RangeImage,
    labeling: &SegmentLabeling,
    min_segment_points: usize,
    timestamp: f64,
) -> Vec<Detection> {
    let n = labeling.segment_count as usize;
    let mut sum = vec![[0.0f64; 2]; n];
    let mut lo = vec![[f64::INFINITY; 2]; n];
    let mut hi = vec![[f64::NEG_INFINITY; 2]; n];
    let mut count = vec![0usize; n];

    for (cell, &label) in image.cells().iter().zip(&labeling.labels) {
        let (Some(c), true) = (cell, label > 0) else {
            continue;
        };
        let k = label as usize - 1;
        for axis in 0..2 {
            let v = c.xyz[axis];
            sum[k][axis] += v;
            lo[k][axis] = lo[k][axis].min(v);
            hi[k][axis] = hi[k][axis].max(v);
        }
        count[k] += 1;
    }

    let mut out: Vec<Detection> = (0..n)
        .filter(|&k| count[k] > 0 && count[k] >= min_segment_points)
        .map(|k| {
            let m = count[k] as f64;
            Detection {
                centroid: [sum[k][0] / m, sum[k][1] / m],
                extent: [
                    (hi[k][0] - lo[k][0]).max(MIN_EXTENT),
                    (hi[k][1] - lo[k][1]).max(MIN_EXTENT),
                ],
                point_count: count[k],
                timestamp,
            }
        })
        .collect();
    out.sort_by(|a, b| {
        b.point_count
            .cmp(&a.point_count)
            .then(a.azimuth().total_cmp(&b.azimuth()))
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perception::{bfs_segment, project, PointCloud, SensorGeometry};
    use approx::assert_relative_eq;

    fn run(points: Vec<[f64; 3]>, min_points: usize) -> Vec<Detection> {
        let g = SensorGeometry::new(vec![0.0], 3600).unwrap();
        let img = project(&PointCloud::new(points, None).unwrap(), &g);
        let seg = bfs_segment(&img, 0.5);
        extract_detections(&img, &seg, min_points, 3.0)
    }

    #[test]
    fn collinear_points() {
        // three rings, one point each, same azimuth bin
        let g = SensorGeometry::new(vec![-0.01, 0.0, 0.01], 3600).unwrap();
        let mut img = crate::perception::RangeImage::empty(&g);
        for (i, x) in [9.9, 10.0, 10.1].into_iter().enumerate() {
            img.set(
                i * 3600,
                Some(crate::perception::Cell {
                    range: x,
                    point: i,
                    xyz: [x, 0.0, 0.0],
                }),
            );
        }
        let seg = bfs_segment(&img, 0.5);
        assert_eq!(seg.segment_count, 1);
        let dets = extract_detections(&img, &seg, 1, 0.0);
        assert_eq!(dets.len(), 1);
        assert_relative_eq!(dets[0].centroid[0], 10.0, epsilon = 1e-12);
        assert_relative_eq!(dets[0].centroid[1], 0.0);
        assert_relative_eq!(dets[0].extent[0], 0.2, epsilon = 1e-12);
        assert_relative_eq!(dets[0].extent[1], MIN_EXTENT);
    }

    #[test]
    fn small_segments_are_omitted() {
        let pts: Vec<[f64; 3]> = (0..3)
            .map(|i| {
                let az = (i as f64 * 0.1 + 0.05).to_radians();
                [10.0 * az.cos(), 10.0 * az.sin(), 0.0]
            })
            .collect();
        assert!(run(pts.clone(), 4).is_empty());
        assert_eq!(run(pts, 3).len(), 1);
    }

    #[test]
    fn ordered_by_size_then_azimuth() {
        let arc = |start_deg: f64, n: usize| -> Vec<[f64; 3]> {
            (0..n)
                .map(|i| {
                    let az = (start_deg + i as f64 * 0.1 + 0.05).to_radians();
                    [10.0 * az.cos(), 10.0 * az.sin(), 0.0]
                })
                .collect()
        };
        let mut pts = arc(90.0, 5);
        pts.extend(arc(10.0, 5));
        pts.extend(arc(200.0, 8));
        let dets = run(pts, 1);
        assert_eq!(dets.len(), 3);
        assert_eq!(dets[0].point_count, 8);
        assert!(dets[1].azimuth() < dets[2].azimuth());
    }

    #[test]
    fn world_conversion() {
        let ego = VesselState::new(Vec2::new(100.0, 50.0), std::f64::consts::FRAC_PI_2, 0.0);
        let d = Detection {
            centroid: [10.0, 2.0],
            extent: [1.0, 1.0],
            point_count: 5,
            timestamp: 0.0,
        };
        let w = d.to_world(&ego);
        // heading east: forward is +east, left is +north
        assert_relative_eq!(w.centroid[0], 110.0, epsilon = 1e-9);
        assert_relative_eq!(w.centroid[1], 52.0, epsilon = 1e-9);
    }
}
