use std::collections::BTreeMap;
use std::io::Read;

use serde::{Deserialize, Serialize};

use super::config::{ObstacleSpec, ScenarioConfig, TracePoint};
use super::run::{run_scenario, RunOutput};
use crate::error::{Error, Result};
use crate::world::{geo_to_local, GeoOrigin};

/// One AIS position report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AisRecord {
    /// Epoch seconds.
    pub timestamp: f64,
    pub vessel_id: String,
    #[serde(rename = "lat")]
    pub latitude: f64,
    #[serde(rename = "lon")]
    pub longitude: f64,
    /// Speed over ground, m/s.
    #[serde(rename = "sog_mps")]
    pub sog: f64,
    /// Course over ground, radians.
    #[serde(rename = "cog_deg", with = "crate::serde_deg")]
    pub cog: f64,
}

/// Reads `timestamp,vessel_id,lat,lon,sog_mps,cog_deg` CSV.
pub fn read_ais_csv<R: Read>(reader: R) -> Result<Vec<AisRecord>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut records = Vec::new();
    for (line, row) in rdr.deserialize::<AisRecord>().enumerate() {
        let r = row?;
        for (name, v) in [
            ("timestamp", r.timestamp),
            ("lat", r.latitude),
            ("lon", r.longitude),
            ("sog_mps", r.sog),
            ("cog_deg", r.cog),
        ] {
            if !v.is_finite() {
                return Err(Error::validation(
                    format!("ais row {} ({}).{name}", line + 2, r.vessel_id),
                    "must be finite",
                ));
            }
        }
        records.push(r);
    }
    Ok(records)
}

/// Converts AIS reports to trace obstacles in the local frame, one per
/// vessel in id order, with time measured from the earliest report.
/// Returns the obstacles and that earliest timestamp.
pub fn ais_to_obstacles(
    records: &[AisRecord],
    origin: &GeoOrigin,
) -> Result<(Vec<ObstacleSpec>, f64)> {
    let mut by_vessel: BTreeMap<&str, Vec<&AisRecord>> = BTreeMap::new();
    for r in records {
        by_vessel.entry(r.vessel_id.as_str()).or_default().push(r);
    }
    let t0 = records
        .iter()
        .map(|r| r.timestamp)
        .fold(f64::INFINITY, f64::min);
    let mut obstacles = Vec::with_capacity(by_vessel.len());
    for (id, reports) in by_vessel {
        if reports.len() < 2 {
            return Err(Error::validation(
                format!("vessel {id}"),
                "needs at least two AIS records",
            ));
        }
        if reports.windows(2).any(|w| w[1].timestamp <= w[0].timestamp) {
            return Err(Error::validation(
                format!("vessel {id}"),
                "records must be strictly increasing in time",
            ));
        }
        let points = reports
            .iter()
            .map(|r| {
                Ok(TracePoint {
                    t: r.timestamp - t0,
                    position: geo_to_local(r.latitude, r.longitude, origin)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        obstacles.push(ObstacleSpec::Trace {
            points,
            extent: [3.0, 1.5],
        });
    }
    Ok((obstacles, t0))
}

/// Runs `config` with every AIS vessel appended as a trace obstacle.
pub fn replay_ais(
    records: &[AisRecord],
    origin: &GeoOrigin,
    config: &ScenarioConfig,
    record_trajectory: bool,
) -> Result<RunOutput> {
    origin.validate()?;
    let (traces, _) = ais_to_obstacles(records, origin)?;
    let mut config = config.clone();
    config.obstacles.extend(traces);
    run_scenario(&config, record_trajectory)
}
