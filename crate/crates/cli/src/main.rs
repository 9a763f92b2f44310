//! `asv`: segment point clouds, run the GM-PHD tracker, plan, and simulate
//! scenarios from the command line.
//!
//! Exit status is 0 on success, 1 for invalid input (the message names the
//! offending field or parse location) and 2 for I/O failures.

mod commands;
mod overrides;

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::LazyLock;

use asv_core::sim::ScenarioConfig;
use asv_core::Error;
use clap::{Args, Parser, Subcommand};

static SCENARIO_KEYS: LazyLock<String> = LazyLock::new(|| {
    format!(
        "Scenario keys accepted by --set (JSON defaults shown; angles in degrees):\n{}",
        overrides::describe(&ScenarioConfig::default())
    )
});

static TRACKING_KEYS: LazyLock<String> = LazyLock::new(|| {
    format!(
        "Tracking keys accepted by --set (JSON defaults shown):\n{}",
        overrides::describe(&asv_core::tracking::PhdParams::default())
    )
});

#[derive(Debug, Parser)]
#[command(
    name = "asv",
    version,
    about = "ASV perception, tracking, collision avoidance and simulation"
)]
struct Cli {
    /// Print nothing but machine-readable output.
    #[arg(long, short, global = true, conflicts_with = "verbose")]
    quiet: bool,
    /// Report progress and summaries on stderr.
    #[arg(long, short, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Segment a point cloud (PCBL binary or x,y,z[,label] CSV) into obstacle detections.
    Segment(SegmentArgs),
    /// Run the GM-PHD tracker over frames of detections.
    #[command(after_long_help = TRACKING_KEYS.as_str())]
    Track(TrackArgs),
    /// Plan one action from a scenario's state at a given time.
    #[command(after_long_help = SCENARIO_KEYS.as_str())]
    Plan(PlanArgs),
    /// Simulate one scenario.
    #[command(after_long_help = SCENARIO_KEYS.as_str())]
    Run(RunArgs),
    /// Run a seeded batch of random scenarios.
    #[command(after_long_help = SCENARIO_KEYS.as_str())]
    Montecarlo(MonteCarloArgs),
    /// Replay AIS traces (CSV timestamp,vessel_id,lat,lon,sog_mps,cog_deg) as obstacles.
    #[command(after_long_help = SCENARIO_KEYS.as_str())]
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
struct SegmentArgs {
    #[arg(long)]
    input: PathBuf,
    /// JSON output; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 16)]
    rings: usize,
    #[arg(long, default_value_t = -15.0, allow_negative_numbers = true)]
    min_elevation_deg: f64,
    #[arg(long, default_value_t = 15.0, allow_negative_numbers = true)]
    max_elevation_deg: f64,
    #[arg(long, default_value_t = 0.2)]
    az_res_deg: f64,
    #[arg(long, default_value_t = 0.5)]
    range_threshold: f64,
    #[arg(long, default_value_t = 1.0)]
    merge_distance: f64,
    #[arg(long, default_value_t = 4)]
    min_points: usize,
    #[arg(long, default_value_t = 1.0)]
    sensor_height: f64,
    #[arg(long, default_value_t = 0.15, allow_negative_numbers = true)]
    z_margin: f64,
    /// Timestamp stamped on the detections, seconds.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    timestamp: f64,
    /// Score the labeling against the cloud's labels.
    #[arg(long)]
    miou: bool,
    /// Include the per-cell labeling in the output.
    #[arg(long)]
    dump_labels: bool,
}

#[derive(Debug, Args)]
struct TrackArgs {
    /// JSON lines, one frame per line: {"timestamp": s, "detections": [...]},
    /// centroids as [east, north].
    #[arg(long)]
    detections: PathBuf,
    /// Tracking parameters (JSON); defaults when omitted.
    #[arg(long)]
    params: Option<PathBuf>,
    /// Override one parameter by dotted key, e.g. `p_detect=0.95`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// JSON lines of tracks per frame; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ScenarioArgs {
    /// Scenario JSON; the built-in default scenario when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one scenario key by dotted path, e.g. `planner.d_safe=30`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Replaces the scenario's rng_seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Run LiDAR segmentation and tracking in the loop.
    #[arg(long)]
    pipeline: bool,
}

#[derive(Debug, Args)]
struct PlanArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Simulated time at which obstacle states are taken, seconds.
    #[arg(long, default_value_t = 0.0)]
    time: f64,
    /// Selected action JSON; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write clusters, feasibility mask, objective vectors and front as JSON.
    #[arg(long)]
    dump_plan: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Metrics CSV; stdout when omitted.
    #[arg(long)]
    metrics: Option<PathBuf>,
    /// Per-step trajectory as JSON lines.
    #[arg(long)]
    trajectory: Option<PathBuf>,
    /// Add wall-clock latency columns (not reproducible between runs).
    #[arg(long)]
    timing: bool,
}

#[derive(Debug, Args)]
struct MonteCarloArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long, default_value_t = 200)]
    runs: usize,
    #[arg(long, default_value_t = 30)]
    obstacles: usize,
    /// Worker threads; all cores when omitted. Results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    /// Per-run metrics CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Aggregate report JSON.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Add latency columns to the CSV and latency percentiles to the summary.
    #[arg(long)]
    timing: bool,
}

#[derive(Debug, Args)]
struct ReplayArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long)]
    ais: PathBuf,
    /// Geodetic origin as LAT,LON degrees; taken from the scenario's `origin` when omitted.
    #[arg(long, value_name = "LAT,LON", allow_hyphen_values = true)]
    origin: Option<String>,
    #[arg(long)]
    metrics: Option<PathBuf>,
    #[arg(long)]
    trajectory: Option<PathBuf>,
    #[arg(long)]
    timing: bool,
}

/// Where human-oriented messages go.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Verbosity {
    Quiet,
    Normal,
    Verbose,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let verbosity = if cli.quiet {
        Verbosity::Quiet
    } else if cli.verbose {
        Verbosity::Verbose
    } else {
        Verbosity::Normal
    };
    let result = match cli.command {
        Command::Segment(a) => commands::segment(a, verbosity),
        Command::Track(a) => commands::track(a, verbosity),
        Command::Plan(a) => commands::plan(a, verbosity),
        Command::Run(a) => commands::run(a, verbosity),
        Command::Montecarlo(a) => commands::montecarlo(a, verbosity),
        Command::Replay(a) => commands::replay(a, verbosity),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }
}
