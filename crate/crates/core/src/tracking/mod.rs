//! Gaussian-mixture PHD filter with a constant-velocity motion model and
//! position-only measurements.
//!
//! The state vector is `[east, north, v_east, v_north]`. The filter itself is
//! unlabeled; [`extract_tracks`] layers stable track ids on top by gating
//! against the previous frame's tracks.

mod filter;
mod tracks;

pub use filter::{phd_predict, phd_update, prune_merge};
pub use tracks::{extract_tracks, PhdTracker, Track};

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::world::Vec2;

pub type StateVector = Vector4<f64>;
pub type StateCovariance = Matrix4<f64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianComponent {
    pub weight: f64,
    pub mean: StateVector,
    pub covariance: StateCovariance,
}

impl GaussianComponent {
    pub fn new(weight: f64, mean: StateVector, covariance: StateCovariance) -> Self {
        Self {
            weight,
            mean,
            covariance,
        }
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.mean[0], self.mean[1])
    }

    pub fn velocity(&self) -> Vec2 {
        Vec2::new(self.mean[2], self.mean[3])
    }

    /// Symmetric to 1e-9 and positive-definite, with a finite non-negative weight.
    pub fn is_valid(&self) -> bool {
        let c = &self.covariance;
        let symmetric = (c - c.transpose()).iter().all(|d| d.abs() <= 1e-9);
        self.weight.is_finite()
            && self.weight >= 0.0
            && self.mean.iter().all(|v| v.is_finite())
            && symmetric
            && c.cholesky().is_some()
    }
}

pub type GaussianMixture = Vec<GaussianComponent>;

/// Total weight of a mixture, i.e. the expected number of targets.
pub fn expected_count(mixture: &[GaussianComponent]) -> f64 {
    mixture.iter().map(|c| c.weight).sum()
}

/// Ring of low-weight birth components around a centre point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BirthRing {
    pub radius: f64,
    pub count: usize,
    /// Weight of each component.
    pub weight: f64,
    pub position_std: f64,
    pub velocity_std: f64,
}

impl Default for BirthRing {
    fn default() -> Self {
        Self {
            radius: 40.0,
            count: 8,
            weight: 1e-4,
            position_std: 25.0,
            velocity_std: 3.0,
        }
    }
}

impl BirthRing {
    pub fn components(&self, centre: Vec2) -> Vec<GaussianComponent> {
        let cov = StateCovariance::from_diagonal(&Vector4::new(
            self.position_std.powi(2),
            self.position_std.powi(2),
            self.velocity_std.powi(2),
            self.velocity_std.powi(2),
        ));
        (0..self.count)
            .map(|k| {
                let bearing = crate::world::TAU * k as f64 / self.count as f64;
                let p = centre + Vec2::from_heading(bearing) * self.radius;
                GaussianComponent::new(self.weight, Vector4::new(p.east, p.north, 0.0, 0.0), cov)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PhdParams {
    pub p_survival: f64,
    pub p_detect: f64,
    /// Expected clutter returns per square metre per frame.
    pub clutter_intensity: f64,
    /// White-acceleration standard deviation, m/s².
    pub process_noise: f64,
    /// Position measurement standard deviation, metres.
    pub meas_noise: f64,
    pub birth_components: Vec<GaussianComponent>,
    pub prune_threshold: f64,
    /// Squared Mahalanobis distance below which components merge.
    pub merge_threshold: f64,
    pub max_components: usize,
    pub extract_threshold: f64,
    /// Metres; a new track inherits an old id within this distance.
    pub gate_distance: f64,
}

impl Default for PhdParams {
    fn default() -> Self {
        Self {
            p_survival: 0.99,
            p_detect: 0.9,
            clutter_intensity: 1e-6,
            process_noise: 0.5,
            meas_noise: 0.5,
            birth_components: BirthRing::default().components(Vec2::ZERO),
            prune_threshold: 1e-5,
            merge_threshold: 4.0,
            max_components: 100,
            extract_threshold: 0.5,
            gate_distance: 3.0,
        }
    }
}

impl PhdParams {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p_survival", self.p_survival), ("p_detect", self.p_detect)] {
            ensure_finite(name, p)?;
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::validation(name, format!("{p} outside (0, 1]")));
            }
        }
        ensure_finite("clutter_intensity", self.clutter_intensity)?;
        if self.clutter_intensity < 0.0 {
            return Err(Error::validation("clutter_intensity", "must be >= 0"));
        }
        ensure_finite("process_noise", self.process_noise)?;
        ensure_finite("meas_noise", self.meas_noise)?;
        ensure_positive("prune_threshold", self.prune_threshold)?;
        ensure_positive("merge_threshold", self.merge_threshold)?;
        ensure_positive("extract_threshold", self.extract_threshold)?;
        ensure_positive("gate_distance", self.gate_distance)?;
        if self.max_components == 0 {
            return Err(Error::validation("max_components", "must be positive"));
        }
        for (i, b) in self.birth_components.iter().enumerate() {
            if !b.is_valid() {
                return Err(Error::validation(
                    format!("birth_components[{i}]"),
                    "needs a finite non-negative weight and a symmetric positive-definite covariance",
                ));
            }
        }
        Ok(())
    }
}
