use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_positive, Result};
use crate::tracking::Track;
use crate::world::{Vec2, VesselState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClusterParams {
    /// Seconds; scales velocity into the position units of the feature space.
    pub time_scale: f64,
    /// Feature-space linkage distance, metres.
    pub cutoff: f64,
    /// Radius added around every obstacle, metres.
    pub safety_radius: f64,
}

impl Default for ClusterParams {
    fn default() -> Self {
        Self {
            time_scale: 30.0,
            cutoff: 40.0,
            safety_radius: 5.0,
        }
    }
}

impl ClusterParams {
    pub fn validate(&self) -> Result<()> {
        ensure_finite("cluster.time_scale", self.time_scale)?;
        ensure_positive("cluster.cutoff", self.cutoff)?;
        ensure_finite("cluster.safety_radius", self.safety_radius)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstacleCluster {
    /// Ascending track ids.
    pub member_ids: Vec<u64>,
    pub representative: VesselState,
    /// Disc radius around the representative, metres.
    pub radius: f64,
}

impl ObstacleCluster {
    pub fn velocity(&self) -> Vec2 {
        self.representative.velocity()
    }
}

fn features(t: &Track, tau: f64) -> [f64; 4] {
    [
        t.position.east,
        t.position.north,
        tau * t.velocity.east,
        tau * t.velocity.north,
    ]
}

fn feature_distance(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Single-linkage clustering in `(east, north, τ·v_east, τ·v_north)`.
/// Clusters come back ordered by the bearing of their representative from
/// the ego vessel.
pub fn cluster_obstacles(
    ego: &VesselState,
    tracks: &[Track],
    params: &ClusterParams,
) -> Vec<ObstacleCluster> {
    let n = tracks.len();
    let f: Vec<[f64; 4]> = tracks
        .iter()
        .map(|t| features(t, params.time_scale))
        .collect();

    let mut component: Vec<usize> = (0..n).collect();
    fn root(c: &mut [usize], mut x: usize) -> usize {
        while c[x] != x {
            c[x] = c[c[x]];
            x = c[x];
        }
        x
    }
    for i in 0..n {
        for j in i + 1..n {
            if feature_distance(&f[i], &f[j]) < params.cutoff {
                let (a, b) = (root(&mut component, i), root(&mut component, j));
                if a != b {
                    component[a.max(b)] = a.min(b);
                }
            }
        }
    }

    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = root(&mut component, i);
        groups.entry(r).or_default().push(i);
    }

    let mut clusters: Vec<ObstacleCluster> = groups
        .into_values()
        .map(|members| {
            let total_w: f64 = members.iter().map(|&i| tracks[i].weight.max(0.0)).sum();
            let m = members.len() as f64;
            let position = if total_w > 0.0 {
                members.iter().fold(Vec2::ZERO, |acc, &i| {
                    acc + tracks[i].position * tracks[i].weight.max(0.0)
                }) * (1.0 / total_w)
            } else {
                members
                    .iter()
                    .fold(Vec2::ZERO, |acc, &i| acc + tracks[i].position)
                    * (1.0 / m)
            };
            let velocity = members
                .iter()
                .fold(Vec2::ZERO, |acc, &i| acc + tracks[i].velocity)
                * (1.0 / m);
            let spread = members
                .iter()
                .map(|&i| tracks[i].position.distance(position))
                .fold(0.0, f64::max);
            let mut member_ids: Vec<u64> = members.iter().map(|&i| tracks[i].id).collect();
            member_ids.sort_unstable();
            let timestamp = tracks[members[0]].timestamp;
            ObstacleCluster {
                member_ids,
                representative: VesselState::from_velocity(position, velocity)
                    .with_timestamp(timestamp),
                radius: spread + params.safety_radius,
            }
        })
        .collect();

    clusters.sort_by(|a, b| {
        let ba = (a.representative.position - ego.position).bearing();
        let bb = (b.representative.position - ego.position).bearing();
        ba.total_cmp(&bb).then(a.member_ids.cmp(&b.member_ids))
    });
    clusters
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn track(id: u64, e: f64, n: f64, ve: f64, vn: f64) -> Track {
        Track {
            id,
            position: Vec2::new(e, n),
            velocity: Vec2::new(ve, vn),
            weight: 1.0,
            age: 1,
            timestamp: 0.0,
        }
    }

    fn ego() -> VesselState {
        VesselState::new(Vec2::ZERO, 0.0, 5.0)
    }

    #[test]
    fn empty_and_singleton() {
        let p = ClusterParams::default();
        assert!(cluster_obstacles(&ego(), &[], &p).is_empty());
        let c = cluster_obstacles(&ego(), &[track(7, 10.0, 20.0, 1.0, 0.0)], &p);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].member_ids, vec![7]);
        assert_eq!(c[0].radius, p.safety_radius);
    }

    #[test]
    fn opposite_motion_splits_colocated_tracks() {
        // feature distance = 30 s * |(2,0) - (-2,0)| = 120 m > 40 m
        let p = ClusterParams::default();
        let c = cluster_obstacles(
            &ego(),
            &[
                track(1, 50.0, 50.0, 2.0, 0.0),
                track(2, 50.0, 50.0, -2.0, 0.0),
            ],
            &p,
        );
        assert_eq!(c.len(), 2);
    }

    #[test]
    fn convoy_merges_and_inflates_radius() {
        let p = ClusterParams::default();
        let c = cluster_obstacles(
            &ego(),
            &[
                track(1, 100.0, 0.0, 1.0, 0.0),
                track(2, 120.0, 0.0, 1.0, 0.0),
                track(3, 140.0, 0.0, 1.0, 0.0),
            ],
            &p,
        );
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].member_ids, vec![1, 2, 3]);
        assert!((c[0].representative.position.east - 120.0).abs() < 1e-9);
        assert!((c[0].radius - (20.0 + p.safety_radius)).abs() < 1e-9);
    }

    #[test]
    fn ordered_by_bearing() {
        let p = ClusterParams::default();
        let c = cluster_obstacles(
            &ego(),
            &[
                track(1, -100.0, 0.0, 0.0, 0.0),
                track(2, 100.0, 0.0, 0.0, 0.0),
                track(3, 0.0, 100.0, 0.0, 0.0),
            ],
            &p,
        );
        let ids: Vec<u64> = c.iter().map(|c| c.member_ids[0]).collect();
        assert_eq!(ids, vec![3, 2, 1]);
    }

    proptest! {
        #[test]
        fn equals_threshold_graph_components(raw in prop::collection::vec((-150.0..150.0f64, -150.0..150.0f64, -3.0..3.0f64, -3.0..3.0f64), 0..25)) {
            let tracks: Vec<Track> = raw.iter().enumerate().map(|(i, r)| track(i as u64, r.0, r.1, r.2, r.3)).collect();
            let p = ClusterParams::default();
            let clusters = cluster_obstacles(&ego(), &tracks, &p);

            // oracle: depth-first search over the threshold graph
            let n = tracks.len();
            let adj = |i: usize, j: usize| {
                let (a, b) = (&tracks[i], &tracks[j]);
                let d = ((a.position.east - b.position.east).powi(2)
                    + (a.position.north - b.position.north).powi(2)
                    + (30.0 * (a.velocity.east - b.velocity.east)).powi(2)
                    + (30.0 * (a.velocity.north - b.velocity.north)).powi(2))
                .sqrt();
                d < 40.0
            };
            let mut comp = vec![usize::MAX; n];
            let mut oracle: Vec<Vec<u64>> = Vec::new();
            for s in 0..n {
                if comp[s] != usize::MAX { continue; }
                let mut stack = vec![s];
                comp[s] = oracle.len();
                let mut members = vec![];
                while let Some(x) = stack.pop() {
                    members.push(x as u64);
                    for (y, cy) in comp.iter_mut().enumerate() {
                        if *cy == usize::MAX && adj(x, y) {
                            *cy = oracle.len();
                            stack.push(y);
                        }
                    }
                }
                members.sort_unstable();
                oracle.push(members);
            }
            let mut got: Vec<Vec<u64>> = clusters.iter().map(|c| c.member_ids.clone()).collect();
            got.sort();
            oracle.sort();
            prop_assert_eq!(got, oracle);
        }
    }
}
