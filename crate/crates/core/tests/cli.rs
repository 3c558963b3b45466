use std::path::Path;
use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_path-assign")).args(args).output().unwrap()
}

fn synth(dir: &Path, kind: &str) -> String {
    let out = cli(&["synth", "--kind", kind, "--seed", "4", "--duration", "3", "--out", dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    dir.join(format!("{kind}_s4.jsonl")).to_str().unwrap().to_string()
}

#[test]
fn run_emits_per_frame_csv() {
    let dir = tempfile::tempdir().unwrap();
    let file = synth(dir.path(), "adjacent_lane");
    for method in ["discrete", "continuous"] {
        let out = cli(&["run", &file, "--method", method, "--epsilon", "1e-3", "--sigma-nu", "0.2"]);
        assert!(out.status.success());
        let text = String::from_utf8(out.stdout).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,object_id,method,assigned,prob,p0,p1,p2,p3,p4");
        // 61 frames, two objects
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), 122);
        assert!(rows.iter().all(|r| r.split(',').nth(2) == Some(method)));
    }
}

#[test]
fn run_is_bit_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let file = synth(dir.path(), "target_lane_change");
    let a = cli(&["run", &file, "--method", "continuous"]).stdout;
    let b = cli(&["run", &file, "--method", "continuous"]).stdout;
    assert_eq!(a, b);
}

#[test]
fn validation_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.jsonl");
    std::fs::write(&bad, "{\"t\":0,\"host\":{\"v\":25,\"var_v\":0,\"var_yaw\":0},\"objects\":[]}\n").unwrap();
    let out = cli(&["run", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 1") && err.contains("yaw_rate"), "{err}");

    assert_eq!(cli(&["synth", "--kind", "roundabout", "--out", dir.path().to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(cli(&["sweep", "--p-min", "1.5"]).status.code(), Some(2));
}

#[test]
fn missing_file_is_not_a_validation_error() {
    let out = cli(&["run", "/nonexistent/scenario.jsonl"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sweep_over_scenario_files() {
    let dir = tempfile::tempdir().unwrap();
    let file = synth(dir.path(), "straight_follow");
    let out = cli(&["sweep", "--method", "discrete", "--scenario", &file, "--epsilon", "0.1,0.001"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("discrete:epsilon=0.1,"));
    // straight_follow has no off-host ground truth
    assert!(rows.iter().all(|r| r.split(',').nth(2) == Some("NA")));
}

#[test]
fn mc_validate_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mc.csv");
    let out = cli(&["mc-validate", "--samples", "500", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.starts_with("x,y,v,yaw_rate,var_x,var_y,var_v,var_yaw,hellinger,status\n"));
    assert_eq!(text.lines().count(), 513);
}
