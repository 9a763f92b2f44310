//! Planar vessel kinematics and the local east/north frame.
//!
//! Headings are radians clockwise from north in `[0, 2π)`. Positions are
//! `(east, north)` metres relative to a [`GeoOrigin`].

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_positive, Error, Result};

pub const TAU: f64 = std::f64::consts::TAU;
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Normalizes an angle to `[0, 2π)`.
pub fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    // rem_euclid can return exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Wraps an angle to `(-π, π]`.
pub fn wrap_pi(a: f64) -> f64 {
    let r = normalize_angle(a);
    if r > std::f64::consts::PI {
        r - TAU
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub east: f64,
    pub north: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 {
        east: 0.0,
        north: 0.0,
    };

    pub const fn new(east: f64, north: f64) -> Self {
        Self { east, north }
    }

    /// Unit vector along a compass heading.
    pub fn from_heading(heading: f64) -> Self {
        Self::new(heading.sin(), heading.cos())
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.east * other.east + self.north * other.north
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.east.hypot(self.north)
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    /// Compass bearing of this vector, `[0, 2π)`. Zero for the zero vector.
    pub fn bearing(self) -> f64 {
        if self.east == 0.0 && self.north == 0.0 {
            0.0
        } else {
            normalize_angle(self.east.atan2(self.north))
        }
    }

    pub fn is_finite(self) -> bool {
        self.east.is_finite() && self.north.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.east + rhs.east, self.north + rhs.north)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.east - rhs.east, self.north - rhs.north)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.east * rhs, self.north * rhs)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.east, -self.north)
    }
}

/// Pose and motion of a vessel in the local frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VesselState {
    pub position: Vec2,
    /// Radians clockwise from north, `[0, 2π)`.
    #[serde(rename = "heading_deg", with = "crate::serde_deg")]
    pub heading: f64,
    /// m/s, never negative.
    pub speed: f64,
    /// rad/s, positive clockwise.
    #[serde(default, rename = "turn_rate_deg_s", with = "crate::serde_deg")]
    pub turn_rate: f64,
    #[serde(default)]
    pub timestamp: f64,
}

impl VesselState {
    pub fn new(position: Vec2, heading: f64, speed: f64) -> Self {
        Self {
            position,
            heading: normalize_angle(heading),
            speed,
            turn_rate: 0.0,
            timestamp: 0.0,
        }
    }

    /// Builds a state from a velocity vector. A zero velocity keeps heading 0.
    pub fn from_velocity(position: Vec2, velocity: Vec2) -> Self {
        Self::new(position, velocity.bearing(), velocity.norm())
    }

    pub fn with_timestamp(mut self, timestamp: f64) -> Self {
        self.timestamp = timestamp;
        self
    }

    pub fn velocity(&self) -> Vec2 {
        Vec2::from_heading(self.heading) * self.speed
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("position.east", self.position.east)?;
        ensure_finite("position.north", self.position.north)?;
        ensure_finite("heading", self.heading)?;
        ensure_finite("speed", self.speed)?;
        ensure_finite("turn_rate", self.turn_rate)?;
        ensure_finite("timestamp", self.timestamp)?;
        if self.speed < 0.0 {
            return Err(Error::validation("speed", "must be >= 0"));
        }
        Ok(())
    }
}

/// A commanded manoeuvre relative to the current heading and nominal speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Action {
    /// Radians, positive to starboard. `|heading_delta| <= π/2`.
    #[serde(rename = "heading_delta_deg", with = "crate::serde_deg")]
    pub heading_delta: f64,
    /// Fraction of nominal speed in `(0, 1]`.
    pub speed_factor: f64,
}

impl Action {
    pub const HOLD: Action = Action {
        heading_delta: 0.0,
        speed_factor: 1.0,
    };

    pub fn new(heading_delta: f64, speed_factor: f64) -> Result<Self> {
        let action = Self {
            heading_delta,
            speed_factor,
        };
        action.validate()?;
        Ok(action)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("heading_delta", self.heading_delta)?;
        ensure_finite("speed_factor", self.speed_factor)?;
        if self.heading_delta.abs() > std::f64::consts::FRAC_PI_2 + 1e-12 {
            return Err(Error::validation(
                "heading_delta",
                "magnitude exceeds 90 degrees",
            ));
        }
        if !(self.speed_factor > 0.0 && self.speed_factor <= 1.0) {
            return Err(Error::validation("speed_factor", "must be in (0, 1]"));
        }
        Ok(())
    }
}

/// First-order response of heading and speed to a command.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DynamicsParams {
    /// Heading time constant, seconds.
    pub heading_time_constant: f64,
    /// Speed time constant, seconds.
    pub speed_time_constant: f64,
}

impl Default for DynamicsParams {
    fn default() -> Self {
        Self {
            heading_time_constant: 2.0,
            speed_time_constant: 3.0,
        }
    }
}

impl DynamicsParams {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("dynamics.heading_time_constant", self.heading_time_constant)?;
        ensure_positive("dynamics.speed_time_constant", self.speed_time_constant)
    }
}

/// Advances a vessel by `dt` under a first-order lag toward the commanded
/// heading (`heading + heading_delta`) and speed (`speed_factor * nominal_speed`).
///
/// Position is integrated with the updated velocity.
pub fn step_kinematics(
    state: &VesselState,
    commanded: &Action,
    nominal_speed: f64,
    dt: f64,
    dynamics: &DynamicsParams,
) -> Result<VesselState> {
    state.validate()?;
    ensure_finite("action.heading_delta", commanded.heading_delta)?;
    ensure_finite("action.speed_factor", commanded.speed_factor)?;
    ensure_finite("nominal_speed", nominal_speed)?;
    ensure_positive("dt", dt)?;
    dynamics.validate()?;

    let heading_gain = 1.0 - (-dt / dynamics.heading_time_constant).exp();
    let speed_gain = 1.0 - (-dt / dynamics.speed_time_constant).exp();

    let turn = commanded.heading_delta * heading_gain;
    let heading = normalize_angle(state.heading + turn);
    let target_speed = commanded.speed_factor * nominal_speed;
    let speed = (state.speed + (target_speed - state.speed) * speed_gain).max(0.0);
    let position = state.position + Vec2::from_heading(heading) * (speed * dt);

    Ok(VesselState {
        position,
        heading,
        speed,
        turn_rate: turn / dt,
        timestamp: state.timestamp + dt,
    })
}

/// Latitude/longitude anchor of the local frame, degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoOrigin {
    pub latitude: f64,
    pub longitude: f64,
}

impl GeoOrigin {
    pub fn new(latitude: f64, longitude: f64) -> Result<Self> {
        let origin = Self {
            latitude,
            longitude,
        };
        origin.validate()?;
        Ok(origin)
    }

    pub fn validate(&self) -> Result<()> {
        validate_lat_lon(self.latitude, self.longitude)
    }
}

fn validate_lat_lon(lat: f64, lon: f64) -> Result<()> {
    ensure_finite("latitude", lat)?;
    ensure_finite("longitude", lon)?;
    if lat.abs() > 90.0 {
        return Err(Error::validation(
            "latitude",
            format!("{lat} outside [-90, 90]"),
        ));
    }
    if lon.abs() > 180.0 {
        return Err(Error::validation(
            "longitude",
            format!("{lon} outside [-180, 180]"),
        ));
    }
    Ok(())
}

const M_PER_DEG: f64 = EARTH_RADIUS_M * std::f64::consts::PI / 180.0;

/// Equirectangular tangent-plane projection around `origin`.
pub fn geo_to_local(lat: f64, lon: f64, origin: &GeoOrigin) -> Result<Vec2> {
    validate_lat_lon(lat, lon)?;
    origin.validate()?;
    let east = (lon - origin.longitude) * origin.latitude.to_radians().cos() * M_PER_DEG;
    let north = (lat - origin.latitude) * M_PER_DEG;
    Ok(Vec2::new(east, north))
}

/// Inverse of [`geo_to_local`]; returns `(lat, lon)` degrees.
pub fn local_to_geo(point: Vec2, origin: &GeoOrigin) -> Result<(f64, f64)> {
    origin.validate()?;
    if !point.is_finite() {
        return Err(Error::validation("point", "must be finite"));
    }
    let cos_lat = origin.latitude.to_radians().cos();
    if cos_lat.abs() < 1e-12 {
        return Err(Error::validation(
            "origin.latitude",
            "projection degenerates at the poles",
        ));
    }
    let lat = origin.latitude + point.north / M_PER_DEG;
    let lon = origin.longitude + point.east / (cos_lat * M_PER_DEG);
    Ok((lat, lon))
}
