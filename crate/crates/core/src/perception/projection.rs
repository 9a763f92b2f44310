use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::world::{normalize_angle, TAU};

/// Sensor-frame points: x forward, y left, z up.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    pub points: Vec<[f64; 3]>,
    /// Ground-truth label per point, 0 for water/background.
    pub labels: Option<Vec<u32>>,
}

impl PointCloud {
    pub fn new(points: Vec<[f64; 3]>, labels: Option<Vec<u32>>) -> Result<Self> {
        let cloud = Self { points, labels };
        cloud.validate()?;
        Ok(cloud)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(i) = self
            .points
            .iter()
            .position(|p| p.iter().any(|c| !c.is_finite()))
        {
            return Err(Error::validation(
                format!("points[{i}]"),
                "coordinates must be finite",
            ));
        }
        if let Some(labels) = &self.labels {
            if labels.len() != self.points.len() {
                return Err(Error::validation(
                    "labels",
                    format!("{} labels for {} points", labels.len(), self.points.len()),
                ));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Ring layout and azimuth binning of a spinning LiDAR.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorGeometry {
    /// Radians, strictly ascending.
    ring_elevations: Vec<f64>,
    cols: usize,
}

impl Default for SensorGeometry {
    /// 16 rings over ±15° and 0.2° azimuth bins.
    fn default() -> Self {
        Self::uniform(16, -15f64.to_radians(), 15f64.to_radians(), 1800)
            .expect("valid default geometry")
    }
}

impl SensorGeometry {
    pub fn new(ring_elevations: Vec<f64>, cols: usize) -> Result<Self> {
        if ring_elevations.is_empty() {
            return Err(Error::validation("rings", "at least one ring is required"));
        }
        if ring_elevations
            .iter()
            .any(|e| !e.is_finite() || e.abs() >= std::f64::consts::FRAC_PI_2)
        {
            return Err(Error::validation(
                "ring_elevations",
                "must be finite and within (-90°, 90°)",
            ));
        }
        if ring_elevations.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::validation(
                "ring_elevations",
                "must be strictly ascending",
            ));
        }
        if cols == 0 {
            return Err(Error::validation("cols", "must be positive"));
        }
        Ok(Self {
            ring_elevations,
            cols,
        })
    }

    /// `rings` evenly spaced elevations from `lowest` to `highest` (radians).
    pub fn uniform(rings: usize, lowest: f64, highest: f64, cols: usize) -> Result<Self> {
        let elevations = match rings {
            0 => Vec::new(),
            1 => vec![0.5 * (lowest + highest)],
            n => (0..n)
                .map(|i| lowest + (highest - lowest) * i as f64 / (n - 1) as f64)
                .collect(),
        };
        Self::new(elevations, cols)
    }

    /// Builds the column count from an azimuth resolution in degrees, which
    /// must divide 360 evenly.
    pub fn with_azimuth_resolution_deg(ring_elevations: Vec<f64>, az_res_deg: f64) -> Result<Self> {
        if !(az_res_deg > 0.0 && az_res_deg.is_finite()) {
            return Err(Error::validation("az-res-deg", "must be positive"));
        }
        let cols = (360.0 / az_res_deg).round();
        if (cols * az_res_deg - 360.0).abs() > 1e-6 {
            return Err(Error::validation(
                "az-res-deg",
                format!("{az_res_deg} does not divide 360"),
            ));
        }
        Self::new(ring_elevations, cols as usize)
    }

    pub fn rows(&self) -> usize {
        self.ring_elevations.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn ring_elevations(&self) -> &[f64] {
        &self.ring_elevations
    }

    pub fn azimuth_resolution(&self) -> f64 {
        TAU / self.cols as f64
    }

    /// Elevation band `[lo, hi)` served by ring `row`: halfway to each
    /// neighbour, mirrored at the ends.
    pub fn ring_band(&self, row: usize) -> (f64, f64) {
        let e = &self.ring_elevations;
        if e.len() == 1 {
            return (
                -std::f64::consts::FRAC_PI_2,
                std::f64::consts::FRAC_PI_2 + 1e-12,
            );
        }
        let below = if row > 0 {
            e[row] - e[row - 1]
        } else {
            e[1] - e[0]
        };
        let above = if row + 1 < e.len() {
            e[row + 1] - e[row]
        } else {
            e[row] - e[row - 1]
        };
        (e[row] - 0.5 * below, e[row] + 0.5 * above)
    }

    /// Ring whose band contains `elevation`, or `None` outside the span.
    pub fn ring_for(&self, elevation: f64) -> Option<usize> {
        let e = &self.ring_elevations;
        let idx = e.partition_point(|&r| r < elevation);
        let row = if idx == 0 {
            0
        } else if idx == e.len() {
            e.len() - 1
        } else if elevation - e[idx - 1] <= e[idx] - elevation {
            idx - 1
        } else {
            idx
        };
        let (lo, hi) = self.ring_band(row);
        (elevation >= lo && elevation < hi).then_some(row)
    }

    pub fn col_for(&self, azimuth: f64) -> usize {
        let col = (normalize_angle(azimuth) / self.azimuth_resolution()).floor() as usize;
        col.min(self.cols - 1)
    }
}

/// A filled range-image cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub range: f64,
    /// Index of the source point in the projected cloud.
    pub point: usize,
    /// Sensor-frame coordinates of the source point.
    pub xyz: [f64; 3],
}

/// Spherical projection of a point cloud: rows are rings, columns azimuth
/// bins counter-clockwise from the sensor's forward axis.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeImage {
    rows: usize,
    cols: usize,
    ring_elevations: Vec<f64>,
    cells: Vec<Option<Cell>>,
}

impl RangeImage {
    pub fn empty(geometry: &SensorGeometry) -> Self {
        Self {
            rows: geometry.rows(),
            cols: geometry.cols(),
            ring_elevations: geometry.ring_elevations().to_vec(),
            cells: vec![None; geometry.rows() * geometry.cols()],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn ring_elevations(&self) -> &[f64] {
        &self.ring_elevations
    }

    pub fn azimuth_resolution(&self) -> f64 {
        TAU / self.cols as f64
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.cols + col
    }

    pub fn get(&self, row: usize, col: usize) -> Option<&Cell> {
        self.cells[self.index(row, col)].as_ref()
    }

    pub fn cells(&self) -> &[Option<Cell>] {
        &self.cells
    }

    pub fn filled(&self) -> usize {
        self.cells.iter().filter(|c| c.is_some()).count()
    }

    pub fn set(&mut self, idx: usize, cell: Option<Cell>) {
        self.cells[idx] = cell;
    }
}

pub(crate) fn spherical(p: &[f64; 3]) -> (f64, f64, f64) {
    let range = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    let azimuth = normalize_angle(p[1].atan2(p[0]));
    let elevation = if range > 0.0 {
        (p[2] / range).asin()
    } else {
        0.0
    };
    (range, azimuth, elevation)
}

/// Projects each point to its nearest ring and azimuth bin. When several
/// points share a cell the nearest one is kept; points outside the ring span
/// (or at zero range) are dropped.
pub fn project(cloud: &PointCloud, geometry: &SensorGeometry) -> RangeImage {
    let mut image = RangeImage::empty(geometry);
    for (i, p) in cloud.points.iter().enumerate() {
        if p.iter().any(|c| !c.is_finite()) {
            continue;
        }
        let (range, azimuth, elevation) = spherical(p);
        if range <= 0.0 {
            continue;
        }
        let Some(row) = geometry.ring_for(elevation) else {
            continue;
        };
        let idx = image.index(row, geometry.col_for(azimuth));
        match image.cells[idx] {
            Some(existing) if existing.range <= range => {}
            _ => {
                image.cells[idx] = Some(Cell {
                    range,
                    point: i,
                    xyz: *p,
                })
            }
        }
    }
    image
}

/// Empties every cell whose point lies below `-sensor_height + z_margin`,
/// i.e. on or near the water plane.
pub fn filter_water_returns(image: &RangeImage, sensor_height: f64, z_margin: f64) -> RangeImage {
    let cutoff = -sensor_height + z_margin;
    let mut out = image.clone();
    for cell in out.cells.iter_mut() {
        if matches!(cell, Some(c) if c.xyz[2] < cutoff) {
            *cell = None;
        }
    }
    out
}
