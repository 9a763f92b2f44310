use std::io::Write;

use super::run::{RunMetrics, TrajectoryRow};
use crate::error::Result;

/// Writes one CSV row per run. Latency columns are appended only when
/// `timing` is set, since wall-clock figures differ between executions.
pub fn write_metrics_csv<W: Write>(
    writer: W,
    rows: &[(usize, u64, &RunMetrics)],
    timing: bool,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec![
        "run",
        "seed",
        "outcome",
        "min_separation",
        "path_length",
        "duration",
        "max_heading_alteration_deg",
        "min_speed_factor",
        "deadlock_events",
        "plan_calls",
    ];
    if timing {
        header.extend(["mean_latency_ms", "max_latency_ms"]);
    }
    w.write_record(&header)?;
    for (run, seed, m) in rows {
        let mut record = vec![
            run.to_string(),
            seed.to_string(),
            m.outcome.to_string(),
            m.min_separation.to_string(),
            m.path_length.to_string(),
            m.duration.to_string(),
            m.max_heading_alteration_deg.to_string(),
            m.min_speed_factor.to_string(),
            m.deadlock_events.to_string(),
            m.plan_calls.to_string(),
        ];
        if timing {
            record.push(m.mean_latency_ms().to_string());
            record.push(m.max_latency_ms().to_string());
        }
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// One JSON object per line.
pub fn write_trajectory_jsonl<W: Write>(mut writer: W, rows: &[TrajectoryRow]) -> Result<()> {
    for row in rows {
        serde_json::to_writer(&mut writer, row)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}
