use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use asv_core::perception::{
    compute_miou, io as cloud_io, project, Detection, SegmentParams, Segmenter, SensorGeometry,
};
use asv_core::planner::plan as plan_action;
use asv_core::sim::{
    monte_carlo, obstacle_state_at, read_ais_csv, replay_ais, run_scenario, write_metrics_csv,
    write_trajectory_jsonl, RunOutput, ScenarioConfig,
};
use asv_core::tracking::{expected_count, PhdParams, PhdTracker, Track};
use asv_core::{Error, GeoOrigin, Result};
use serde::{Deserialize, Serialize};

use crate::overrides;
use crate::{
    MonteCarloArgs, PlanArgs, ReplayArgs, RunArgs, ScenarioArgs, SegmentArgs, TrackArgs, Verbosity,
};

fn io_error(path: &Path, err: io::Error) -> Error {
    Error::Io(io::Error::new(
        err.kind(),
        format!("{}: {err}", path.display()),
    ))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| io_error(path, e))
}

fn read_to_string(path: &Path) -> Result<String> {
    let mut text = String::new();
    open(path)?
        .read_to_string(&mut text)
        .map_err(|e| io_error(path, e))?;
    Ok(text)
}

/// Runs `body` against the file at `path`, or stdout when `path` is `None`.
fn with_output(path: Option<&Path>, body: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|e| io_error(p, e))?;
            let mut w = BufWriter::new(file);
            body(&mut w)?;
            w.flush().map_err(|e| io_error(p, e))
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            body(&mut w)?;
            w.flush().map_err(Error::Io)
        }
    }
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    with_output(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        w.write_all(b"\n")?;
        Ok(())
    })
}

fn note(verbosity: Verbosity, level: Verbosity, message: impl FnOnce() -> String) {
    if verbosity >= level {
        eprintln!("{}", message());
    }
}

fn load_scenario(args: &ScenarioArgs) -> Result<ScenarioConfig> {
    let base = match &args.config {
        Some(path) => serde_json::from_str(&read_to_string(path)?)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?,
        None => ScenarioConfig::default(),
    };
    let mut config: ScenarioConfig = overrides::apply(&base, &args.overrides)?;
    if let Some(seed) = args.seed {
        config.rng_seed = seed;
    }
    if args.pipeline {
        config.pipeline = true;
    }
    config.validate()?;
    Ok(config)
}

#[derive(Serialize)]
struct LabelDump {
    rows: usize,
    cols: usize,
    labels: Vec<u32>,
}

#[derive(Serialize)]
struct SegmentReport {
    point_count: usize,
    retained_cells: usize,
    segment_count: u32,
    detections: Vec<Detection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    miou: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    labeling: Option<LabelDump>,
}

pub fn segment(args: SegmentArgs, verbosity: Verbosity) -> Result<()> {
    let cloud = if args
        .input
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
    {
        cloud_io::read_csv(open(&args.input)?)
    } else {
        cloud_io::read_binary(open(&args.input)?)
    }
    .map_err(|e| match e {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", args.input.display())),
        other => other,
    })?;
    let rings = SensorGeometry::uniform(
        args.rings,
        args.min_elevation_deg.to_radians(),
        args.max_elevation_deg.to_radians(),
        1,
    )?;
    let geometry = SensorGeometry::with_azimuth_resolution_deg(
        rings.ring_elevations().to_vec(),
        args.az_res_deg,
    )?;
    let params = SegmentParams {
        range_threshold: args.range_threshold,
        merge_distance: args.merge_distance,
        min_segment_points: args.min_points,
        sensor_height: args.sensor_height,
        z_margin: args.z_margin,
    };
    let segmenter = Segmenter::new(geometry.clone(), params)?;
    let out = segmenter.run(&cloud, args.timestamp);

    let miou = if args.miou {
        let labels = cloud
            .labels
            .as_ref()
            .ok_or_else(|| Error::validation("miou", "the input cloud has no labels"))?;
        let truth: Vec<u32> = project(&cloud, &geometry)
            .cells()
            .iter()
            .map(|c| c.map_or(0, |c| labels[c.point]))
            .collect();
        Some(compute_miou(&out.labeling, &truth)?)
    } else {
        None
    };
    note(verbosity, Verbosity::Normal, || {
        format!(
            "{} points, {} retained cells, {} segments, {} detections",
            cloud.len(),
            out.image.filled(),
            out.labeling.segment_count,
            out.detections.len()
        )
    });
    let report = SegmentReport {
        point_count: cloud.len(),
        retained_cells: out.image.filled(),
        segment_count: out.labeling.segment_count,
        detections: out.detections,
        miou,
        labeling: args.dump_labels.then(|| LabelDump {
            rows: out.labeling.rows,
            cols: out.labeling.cols,
            labels: out.labeling.labels.clone(),
        }),
    };
    write_json(args.out.as_deref(), &report)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Frame {
    timestamp: f64,
    detections: Vec<Detection>,
}

#[derive(Serialize)]
struct TrackFrame<'a> {
    timestamp: f64,
    expected_count: f64,
    tracks: &'a [Track],
}

pub fn track(args: TrackArgs, verbosity: Verbosity) -> Result<()> {
    let base = match &args.params {
        Some(path) => serde_json::from_str(&read_to_string(path)?)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?,
        None => PhdParams::default(),
    };
    let params: PhdParams = overrides::apply(&base, &args.overrides)?;
    let mut tracker = PhdTracker::new(params)?;

    let mut frames = Vec::new();
    for (n, line) in open(&args.detections)?.lines().enumerate() {
        let line = line.map_err(|e| io_error(&args.detections, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let frame: Frame = serde_json::from_str(&line).map_err(|e| {
            Error::Parse(format!("{} line {}: {e}", args.detections.display(), n + 1))
        })?;
        frames.push(frame);
    }

    with_output(args.out.as_deref(), |w| {
        for frame in &frames {
            let tracks = tracker.step(&frame.detections, frame.timestamp)?.to_vec();
            let row = TrackFrame {
                timestamp: frame.timestamp,
                expected_count: expected_count(tracker.mixture()),
                tracks: &tracks,
            };
            serde_json::to_writer(&mut *w, &row)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    })?;
    note(verbosity, Verbosity::Normal, || {
        format!(
            "{} frames, {} tracks at the end",
            frames.len(),
            tracker.tracks().len()
        )
    });
    Ok(())
}

pub fn plan(args: PlanArgs, verbosity: Verbosity) -> Result<()> {
    let config = load_scenario(&args.scenario)?;
    if !args.time.is_finite() {
        return Err(Error::validation("time", "must be finite"));
    }
    let ego = config.ego.state().with_timestamp(args.time);
    let tracks: Vec<Track> = config
        .obstacles
        .iter()
        .enumerate()
        .map(|(i, o)| Track::from_state(i as u64 + 1, &obstacle_state_at(o, args.time)))
        .collect();
    let result = plan_action(&ego, &tracks, config.goal, &config.planner_params());

    #[derive(Serialize)]
    struct Selected {
        action: asv_core::Action,
        deadlock: bool,
        feasible_actions: usize,
        front_size: usize,
    }
    let selected = Selected {
        action: result.action,
        deadlock: result.deadlock,
        feasible_actions: result
            .diagnostics
            .mask
            .feasible
            .iter()
            .filter(|f| **f)
            .count(),
        front_size: result.diagnostics.front.len(),
    };
    note(verbosity, Verbosity::Normal, || {
        format!(
            "{} clusters, {} feasible actions, front of {}; heading {:+.1}°, speed factor {}{}",
            result.diagnostics.clusters.len(),
            selected.feasible_actions,
            selected.front_size,
            result.action.heading_delta.to_degrees(),
            result.action.speed_factor,
            if result.deadlock {
                " (deadlock contingency)"
            } else {
                ""
            }
        )
    });
    if let Some(path) = &args.dump_plan {
        write_json(Some(path), &result)?;
    }
    write_json(args.out.as_deref(), &selected)
}

fn emit_run(
    out: &RunOutput,
    seed: u64,
    metrics: Option<&PathBuf>,
    trajectory: Option<&PathBuf>,
    timing: bool,
    verbosity: Verbosity,
) -> Result<()> {
    if let Some(path) = trajectory {
        with_output(Some(path), |w| write_trajectory_jsonl(w, &out.trajectory))?;
    }
    with_output(metrics.map(|p| p.as_path()), |w| {
        write_metrics_csv(w, &[(0, seed, &out.metrics)], timing)
    })?;
    let m = &out.metrics;
    note(verbosity, Verbosity::Normal, || {
        format!(
            "{} after {:.1} s, min separation {:.2} m, path {:.1} m, max heading alteration {:.1}°",
            m.outcome, m.duration, m.min_separation, m.path_length, m.max_heading_alteration_deg
        )
    });
    if timing {
        note(verbosity, Verbosity::Normal, || {
            format!(
                "{} planner calls, mean {:.3} ms, max {:.3} ms",
                m.plan_calls,
                m.mean_latency_ms(),
                m.max_latency_ms()
            )
        });
    }
    Ok(())
}

pub fn run(args: RunArgs, verbosity: Verbosity) -> Result<()> {
    let config = load_scenario(&args.scenario)?;
    note(verbosity, Verbosity::Verbose, || {
        format!(
            "{} obstacles, seed {}",
            config.obstacles.len(),
            config.rng_seed
        )
    });
    let out = run_scenario(&config, args.trajectory.is_some())?;
    emit_run(
        &out,
        config.rng_seed,
        args.metrics.as_ref(),
        args.trajectory.as_ref(),
        args.timing,
        verbosity,
    )
}

#[derive(Serialize)]
struct Summary<'a> {
    runs: usize,
    obstacle_count: usize,
    seed: u64,
    success_rate: f64,
    collision_rate: f64,
    timeout_rate: f64,
    deadlock_unresolved: usize,
    deadlock_events: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    latency: Option<&'a asv_core::sim::LatencySummary>,
}

pub fn montecarlo(args: MonteCarloArgs, verbosity: Verbosity) -> Result<()> {
    let config = load_scenario(&args.scenario)?;
    let seed = config.rng_seed;
    if args.threads == Some(0) {
        return Err(Error::validation("threads", "must be at least 1"));
    }
    note(verbosity, Verbosity::Verbose, || {
        format!(
            "{} runs with {} obstacles, seed {seed}",
            args.runs, args.obstacles
        )
    });
    let report = monte_carlo(&config, args.runs, args.obstacles, seed, args.threads)?;
    let rows: Vec<(usize, u64, &_)> = report
        .metrics
        .iter()
        .enumerate()
        .map(|(i, m)| (i, report.run_seeds[i], m))
        .collect();
    with_output(args.out.as_deref(), |w| {
        write_metrics_csv(w, &rows, args.timing)
    })?;

    let summary = Summary {
        runs: report.runs,
        obstacle_count: report.obstacle_count,
        seed,
        success_rate: report.success_rate,
        collision_rate: report.collision_rate,
        timeout_rate: report.timeout_rate,
        deadlock_unresolved: report.deadlock_unresolved,
        deadlock_events: report.deadlock_events,
        latency: args.timing.then_some(&report.latency),
    };
    if let Some(path) = &args.summary {
        write_json(Some(path), &summary)?;
    }
    note(verbosity, Verbosity::Normal, || {
        format!(
            "success {:.3}, collision {:.3}, timeout {:.3}, unresolved deadlocks {}",
            summary.success_rate,
            summary.collision_rate,
            summary.timeout_rate,
            summary.deadlock_unresolved
        )
    });
    if args.timing {
        let l = &report.latency;
        note(verbosity, Verbosity::Normal, || {
            format!(
                "plan latency over {} calls: mean {:.3} ms, p50 {:.3}, p95 {:.3}, p99 {:.3}, max {:.3}",
                l.count, l.mean_ms, l.p50_ms, l.p95_ms, l.p99_ms, l.max_ms
            )
        });
    }
    Ok(())
}

fn parse_origin(text: &str) -> Result<GeoOrigin> {
    let parsed = text
        .split_once(',')
        .and_then(|(a, b)| Some((a.trim().parse::<f64>().ok()?, b.trim().parse::<f64>().ok()?)));
    match parsed {
        Some((lat, lon)) => GeoOrigin::new(lat, lon),
        None => Err(Error::validation(
            "origin",
            format!("expected LAT,LON degrees, got {text:?}"),
        )),
    }
}

pub fn replay(args: ReplayArgs, verbosity: Verbosity) -> Result<()> {
    let config = load_scenario(&args.scenario)?;
    let origin = match &args.origin {
        Some(text) => parse_origin(text)?,
        None => config.origin.ok_or_else(|| {
            Error::validation(
                "origin",
                "give --origin LAT,LON or set origin in the scenario",
            )
        })?,
    };
    let records = read_ais_csv(open(&args.ais)?).map_err(|e| match e {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", args.ais.display())),
        other => other,
    })?;
    note(verbosity, Verbosity::Verbose, || {
        format!("{} AIS records", records.len())
    });
    let out = replay_ais(&records, &origin, &config, args.trajectory.is_some())?;
    emit_run(
        &out,
        config.rng_seed,
        args.metrics.as_ref(),
        args.trajectory.as_ref(),
        args.timing,
        verbosity,
    )
}
