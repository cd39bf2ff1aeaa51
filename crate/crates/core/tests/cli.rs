use std::fs;
use std::process::{Command, Output};

use antipodal::CoincidenceSet;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_antipodal"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn solve_triple_writes_three_pairs() {
    let out = run(&["solve", "--scenario", "triple"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let set: CoincidenceSet = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(set.pair_count(), 3);

    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for key in ["epsilon", "pairs", "certificate", "genericity_ok"] {
        assert!(value.get(key).is_some(), "{key}");
    }
    for key in ["rep", "residual", "jac_det", "index", "degenerate"] {
        assert!(value["pairs"][0].get(key).is_some(), "{key}");
    }
}

#[test]
fn solve_pitchfork_at_zero_exits_two() {
    let out = run(&["solve", "--scenario", "pitchfork", "--epsilon", "0"]);
    assert_eq!(code(&out), 2);
    let set: CoincidenceSet = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(set.pair_count(), 2);
}

#[test]
fn solve_reads_map_and_config_files() {
    let dir = tempfile::tempdir().unwrap();
    let map = dir.path().join("map.json");
    fs::write(
        &map,
        r#"{"comp1": [[0.5, 1, 0, 2], [-0.125, 1, 0, 0], [3.0, 0, 0, 0]], "comp2": [[0.5, 0, 1, 0]]}"#,
    )
    .unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"mesh_level": 5}"#).unwrap();
    let out_path = dir.path().join("set.json");
    let out = run(&[
        "solve",
        "--map",
        map.to_str().unwrap(),
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let set: CoincidenceSet = serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(set.pair_count(), 3);
    assert_eq!(set.recertify(), set.certificate);
}

#[test]
fn bad_inputs_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"comp1\": [[1, 1, 0").unwrap();
    for args in [
        vec!["solve", "--map", bad.to_str().unwrap()],
        vec!["solve", "--map", "/nonexistent/map.json"],
        vec!["solve", "--scenario", "no-such-scenario"],
        vec!["solve", "--scenario", "classic", "--config", bad.to_str().unwrap()],
        vec![
            "sweep",
            "--scenario",
            "pitchfork",
            "--eps",
            "-0.1",
            "0.1",
            "--steps",
            "1",
        ],
        vec!["verify", "--trials", "1", "--seed", "1", "--degree", "0"],
        vec!["solve"],
        vec!["frobnicate"],
    ] {
        let out = run(&args);
        assert_eq!(code(&out), 1, "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn sweep_writes_trace_and_events() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "sweep",
        "--scenario",
        "pitchfork",
        "--eps",
        "-0.1",
        "0.1",
        "--steps",
        "41",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let events: Vec<serde_json::Value> =
        serde_json::from_str(&fs::read_to_string(dir.path().join("events.json")).unwrap()).unwrap();
    assert_eq!(events.len(), 1);
    assert_eq!(events[0]["count_before"], 1);
    assert_eq!(events[0]["count_after"], 3);
    assert!(events[0]["eps_lo"].as_f64().unwrap() < 0.0 && events[0]["eps_hi"].as_f64().unwrap() > 0.0);

    let csv = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert!(csv.starts_with("epsilon,branch_id,rep_x,rep_y,rep_z,jacobian_det,local_index\n"));
}

#[test]
fn sweep_of_constant_family_has_no_events() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "sweep",
        "--scenario",
        "classic",
        "--eps",
        "0",
        "1",
        "--steps",
        "3",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(fs::read_to_string(dir.path().join("events.json")).unwrap().trim(), "[]");
}

#[test]
fn verify_linear_field() {
    let out = run(&["verify", "--trials", "1", "--seed", "1", "--degree", "1"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split_whitespace().collect();
    assert_eq!(row[2], "1", "{text}");
}

#[test]
fn list_scenarios_names_everything() {
    let out = run(&["list-scenarios"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    for name in [
        "classic",
        "triple",
        "quintuple",
        "septuple",
        "many-21",
        "pitchfork",
        "random-odd",
    ] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name}");
    }
}
