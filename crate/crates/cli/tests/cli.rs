use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use asv_core::perception::io::{write_binary, write_csv};
use asv_core::sim::{random_box_scene, synthetic_lidar, LidarConfig};
use asv_core::world::{Vec2, VesselState};

fn asv(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_asv"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn scenario(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_scene(dir: &Path, csv: bool) -> PathBuf {
    let ego = VesselState::new(Vec2::ZERO, 0.0, 0.0);
    let cloud = synthetic_lidar(
        &ego,
        &random_box_scene(4, 5, 20.0),
        &LidarConfig::default(),
        1.0,
        4,
    )
    .unwrap();
    let path = dir.join(if csv { "scene.csv" } else { "scene.pcbl" });
    let file = std::fs::File::create(&path).unwrap();
    if csv {
        write_csv(&cloud, file).unwrap();
    } else {
        write_binary(&cloud, file).unwrap();
    }
    path
}

#[test]
fn montecarlo_single_empty_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = asv(
        &[
            "montecarlo",
            "--runs",
            "1",
            "--obstacles",
            "0",
            "--seed",
            "7",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[1].split(',').nth(2), Some("GOAL_REACHED"));
}

#[test]
fn malformed_config_reports_location() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.json"), "{\n  \"ego\": [1,\n").unwrap();
    let out = asv(&["run", "--config", "bad.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let msg = stderr(&out);
    assert!(msg.contains("line") && msg.contains("column"), "{msg}");
}

#[test]
fn validation_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let out = asv(
        &[
            "run",
            "--config",
            &scenario("head_on.json"),
            "--set",
            "collision_radius=30",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("collision_radius"));

    let out = asv(&["run", "--set", "planner.horizn=10"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("planner.horizn"));

    let out = asv(&["montecarlo", "--runs", "0"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("runs"));
}

#[test]
fn io_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = asv(&["run", "--config", "missing.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("missing.json"));
    let out = asv(&["run", "--metrics", "no/such/dir/m.csv"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_arguments_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        asv(&["run", "--frobnicate"], dir.path()).status.code(),
        Some(1)
    );
    assert_eq!(asv(&["teleport"], dir.path()).status.code(), Some(1));
    assert_eq!(asv(&["--help"], dir.path()).status.code(), Some(0));
}

#[test]
fn help_lists_schema_keys() {
    let dir = tempfile::tempdir().unwrap();
    let out = asv(&["run", "--help"], dir.path());
    let text = String::from_utf8(out.stdout).unwrap();
    for key in [
        "planner.d_safe",
        "planner.grid.heading_deltas_deg",
        "avoid.thresholds.dcpa_gate",
        "rng_seed",
    ] {
        assert!(text.contains(key), "missing {key}");
    }
}

#[test]
fn quiet_stdout_is_only_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = asv(
        &["-q", "run", "--config", &scenario("head_on.json")],
        dir.path(),
    );
    assert!(out.status.success());
    assert!(out.stderr.is_empty());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().all(|l| l.split(',').count() == 10));
}

#[test]
fn run_writes_trajectory_and_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let out = asv(
        &[
            "run",
            "--config",
            &scenario("crossing.json"),
            "--metrics",
            "m.csv",
            "--trajectory",
            "t.jsonl",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(out.stdout.is_empty());
    let metrics = std::fs::read_to_string(dir.path().join("m.csv")).unwrap();
    assert!(metrics.lines().nth(1).unwrap().contains("GOAL_REACHED"));
    let traj = std::fs::read_to_string(dir.path().join("t.jsonl")).unwrap();
    let first: serde_json::Value = serde_json::from_str(traj.lines().next().unwrap()).unwrap();
    assert_eq!(first["obstacles"].as_array().unwrap().len(), 2);
    assert!(first["action"]["heading_delta_deg"].is_number());
    assert!(first["risk"]["encounter"].is_string());
}

#[test]
fn plan_dump_contains_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let out = asv(
        &[
            "plan",
            "--config",
            &scenario("head_on.json"),
            "--time",
            "60",
            "--dump-plan",
            "plan.json",
            "--out",
            "a.json",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let dump: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("plan.json")).unwrap())
            .unwrap();
    for key in ["clusters", "mask", "scored", "front"] {
        assert!(
            dump["diagnostics"][key].is_array() || dump["diagnostics"][key].is_object(),
            "{key}"
        );
    }
    let action: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("a.json")).unwrap()).unwrap();
    assert!(action["action"]["heading_delta_deg"].as_f64().unwrap() > 0.0);
}

#[test]
fn segment_binary_and_csv_agree() {
    let dir = tempfile::tempdir().unwrap();
    let bin = write_scene(dir.path(), false);
    let csv = write_scene(dir.path(), true);
    let a = asv(
        &["segment", "--input", bin.to_str().unwrap(), "--miou", "-q"],
        dir.path(),
    );
    let b = asv(
        &["segment", "--input", csv.to_str().unwrap(), "--miou", "-q"],
        dir.path(),
    );
    assert!(a.status.success(), "{}", stderr(&a));
    let ja: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    let jb: serde_json::Value = serde_json::from_slice(&b.stdout).unwrap();
    assert_eq!(ja["segment_count"], jb["segment_count"]);
    assert_eq!(ja["detections"].as_array().unwrap().len(), 5);
    assert!(ja["miou"].as_f64().unwrap() > 0.8);
}

#[test]
fn segment_miou_needs_labels() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("u.csv"), "x,y,z\n10,0,0\n10,0.1,0\n").unwrap();
    let out = asv(&["segment", "--input", "u.csv", "--miou"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("miou"));
}

#[test]
fn track_follows_frames() {
    let dir = tempfile::tempdir().unwrap();
    let mut frames = String::new();
    for k in 0..10 {
        let t = k as f64;
        frames.push_str(&format!(
            "{{\"timestamp\":{t},\"detections\":[{{\"centroid\":[{},10.0],\"extent\":[3,1.5],\"point_count\":20,\"timestamp\":{t}}}]}}\n",
            -30.0 + 2.0 * t
        ));
    }
    std::fs::write(dir.path().join("f.jsonl"), frames).unwrap();
    let out = asv(
        &["track", "--detections", "f.jsonl", "--out", "tracks.jsonl"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let text = std::fs::read_to_string(dir.path().join("tracks.jsonl")).unwrap();
    let rows: Vec<serde_json::Value> = text
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(rows.len(), 10);
    let last = &rows[9]["tracks"].as_array().unwrap()[0];
    assert!((last["position"]["east"].as_f64().unwrap() - (-12.0)).abs() < 1.5);
    assert!((last["velocity"]["east"].as_f64().unwrap() - 2.0).abs() < 0.5);

    let out = asv(
        &["track", "--detections", "f.jsonl", "--set", "p_detect=1.5"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("p_detect"));
}

#[test]
fn replay_takes_origin_from_flag_or_config() {
    let dir = tempfile::tempdir().unwrap();
    let ais = scenario("crossing_ais.csv");
    let out = asv(
        &[
            "replay",
            "--ais",
            &ais,
            "--config",
            &scenario("replay_base.json"),
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let with_flag = asv(
        &[
            "replay",
            "--ais",
            &ais,
            "--config",
            &scenario("replay_base.json"),
            "--origin",
            "59.9,10.7",
        ],
        dir.path(),
    );
    assert_eq!(out.stdout, with_flag.stdout);
    let missing = asv(
        &[
            "replay",
            "--ais",
            &ais,
            "--config",
            &scenario("head_on.json"),
        ],
        dir.path(),
    );
    assert_eq!(missing.status.code(), Some(1));
    assert!(stderr(&missing).contains("origin"));
}

#[test]
fn replay_rejects_single_record_vessel() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("a.csv"),
        "timestamp,vessel_id,lat,lon,sog_mps,cog_deg\n0,ALPHA,59.9,10.7,0,0\n1,ALPHA,59.9,10.7,0,0\n0,BRAVO,59.91,10.7,0,0\n",
    )
    .unwrap();
    let out = asv(
        &[
            "replay",
            "--ais",
            "a.csv",
            "--config",
            &scenario("replay_base.json"),
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("BRAVO"));
}
