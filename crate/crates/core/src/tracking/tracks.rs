use serde::{Deserialize, Serialize};

use super::{phd_predict, phd_update, prune_merge, GaussianComponent, PhdParams};
use crate::error::{Error, Result};
use crate::perception::Detection;
use crate::world::{Vec2, VesselState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Track {
    pub id: u64,
    pub position: Vec2,
    pub velocity: Vec2,
    pub weight: f64,
    /// Frames since the id was first assigned.
    pub age: u32,
    pub timestamp: f64,
}

impl Track {
    /// A ground-truth track for a known vessel.
    pub fn from_state(id: u64, state: &VesselState) -> Self {
        Self {
            id,
            position: state.position,
            velocity: state.velocity(),
            weight: 1.0,
            age: 1,
            timestamp: state.timestamp,
        }
    }

    pub fn to_state(&self) -> VesselState {
        VesselState::from_velocity(self.position, self.velocity).with_timestamp(self.timestamp)
    }

    /// Position extrapolated to `t` at constant velocity.
    pub fn position_at(&self, t: f64) -> Vec2 {
        self.position + self.velocity * (t - self.timestamp)
    }
}

/// Turns components with weight at or above `extract_threshold` into tracks.
///
/// Each new track takes the id of the nearest previous track whose
/// extrapolated position lies within `gate_distance` (one-to-one, closest
/// pairs first) and otherwise a fresh id drawn from `next_id`.
pub fn extract_tracks(
    mixture: &[GaussianComponent],
    previous: &[Track],
    params: &PhdParams,
    timestamp: f64,
    next_id: &mut u64,
) -> Vec<Track> {
    let strong: Vec<&GaussianComponent> = mixture
        .iter()
        .filter(|c| c.weight >= params.extract_threshold)
        .collect();

    let mut pairs = Vec::new();
    for (ci, c) in strong.iter().enumerate() {
        for (pi, p) in previous.iter().enumerate() {
            let d = c.position().distance(p.position_at(timestamp));
            if d <= params.gate_distance {
                pairs.push((d, ci, pi));
            }
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut assigned: Vec<Option<usize>> = vec![None; strong.len()];
    let mut taken = vec![false; previous.len()];
    for (_, ci, pi) in pairs {
        if assigned[ci].is_none() && !taken[pi] {
            assigned[ci] = Some(pi);
            taken[pi] = true;
        }
    }

    let mut tracks: Vec<Track> = strong
        .iter()
        .zip(assigned)
        .map(|(c, prev)| {
            let (id, age) = match prev {
                Some(pi) => (previous[pi].id, previous[pi].age + 1),
                None => {
                    let id = *next_id;
                    *next_id += 1;
                    (id, 1)
                }
            };
            Track {
                id,
                position: c.position(),
                velocity: c.velocity(),
                weight: c.weight,
                age,
                timestamp,
            }
        })
        .collect();
    tracks.sort_by_key(|t| t.id);
    tracks
}

/// A running filter: mixture, live tracks and the id counter.
#[derive(Debug, Clone)]
pub struct PhdTracker {
    pub params: PhdParams,
    mixture: Vec<GaussianComponent>,
    tracks: Vec<Track>,
    next_id: u64,
    last_timestamp: Option<f64>,
}

impl PhdTracker {
    pub fn new(params: PhdParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            mixture: Vec::new(),
            tracks: Vec::new(),
            next_id: 1,
            last_timestamp: None,
        })
    }

    pub fn mixture(&self) -> &[GaussianComponent] {
        &self.mixture
    }

    pub fn tracks(&self) -> &[Track] {
        &self.tracks
    }

    /// Runs predict, update, prune/merge and track extraction for one frame.
    /// Frames must arrive in strictly increasing time order.
    pub fn step(&mut self, detections: &[Detection], timestamp: f64) -> Result<&[Track]> {
        if !timestamp.is_finite() {
            return Err(Error::validation("timestamp", "must be finite"));
        }
        let dt = match self.last_timestamp {
            Some(last) if timestamp <= last => {
                return Err(Error::validation(
                    "timestamp",
                    format!("frame at {timestamp} does not follow {last}"),
                ))
            }
            Some(last) => timestamp - last,
            None => 1.0,
        };
        let predicted = phd_predict(&self.mixture, &self.params, dt);
        let updated = phd_update(&predicted, detections, &self.params)?;
        self.mixture = prune_merge(&updated, &self.params);
        self.tracks = extract_tracks(
            &self.mixture,
            &self.tracks,
            &self.params,
            timestamp,
            &mut self.next_id,
        );
        self.last_timestamp = Some(timestamp);
        Ok(&self.tracks)
    }
}
