//! LiDAR obstacle segmentation on a spherical range image.
//!
//! The pipeline is [`project`] → [`filter_water_returns`] → [`bfs_segment`]
//! → [`agglomerative_merge`] → [`extract_detections`]. [`Segmenter`] bundles
//! the stages with their parameters.

mod detect;
pub mod io;
mod miou;
mod projection;
mod segment;

pub use detect::{extract_detections, Detection};
pub use miou::compute_miou;
pub use projection::{filter_water_returns, project, Cell, PointCloud, RangeImage, SensorGeometry};
pub use segment::{agglomerative_merge, bfs_segment, SegmentLabeling};

use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SegmentParams {
    /// Metres; adjacent cells connect when their ranges differ by less.
    pub range_threshold: f64,
    /// Metres; segments closer than this are merged.
    pub merge_distance: f64,
    pub min_segment_points: usize,
    /// Height of the sensor above the water plane, metres.
    pub sensor_height: f64,
    pub z_margin: f64,
}

impl Default for SegmentParams {
    fn default() -> Self {
        Self {
            range_threshold: 0.5,
            merge_distance: 1.0,
            min_segment_points: 4,
            sensor_height: 1.0,
            z_margin: 0.15,
        }
    }
}

impl SegmentParams {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("range_threshold", self.range_threshold)?;
        ensure_positive("merge_distance", self.merge_distance)?;
        ensure_positive("sensor_height", self.sensor_height)?;
        crate::error::ensure_finite("z_margin", self.z_margin)
    }
}

/// Everything produced by one pass of the segmentation pipeline.
#[derive(Debug, Clone)]
pub struct SegmentOutput {
    pub image: RangeImage,
    pub labeling: SegmentLabeling,
    pub detections: Vec<Detection>,
}

#[derive(Debug, Clone)]
pub struct Segmenter {
    pub geometry: SensorGeometry,
    pub params: SegmentParams,
}

impl Segmenter {
    pub fn new(geometry: SensorGeometry, params: SegmentParams) -> Result<Self> {
        params.validate()?;
        Ok(Self { geometry, params })
    }

    pub fn run(&self, cloud: &PointCloud, timestamp: f64) -> SegmentOutput {
        let p = &self.params;
        let image = project(cloud, &self.geometry);
        let image = filter_water_returns(&image, p.sensor_height, p.z_margin);
        let labeling = bfs_segment(&image, p.range_threshold);
        let labeling = agglomerative_merge(&image, &labeling, p.merge_distance);
        let detections = extract_detections(&image, &labeling, p.min_segment_points, timestamp);
        SegmentOutput {
            image,
            labeling,
            detections,
        }
    }
}
