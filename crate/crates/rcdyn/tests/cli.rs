use std::process::Command;

fn rcdyn(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_rcdyn"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &std::process::Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn gap_k2_values() {
    let out = rcdyn(&["gap", "--graph", "path:2", "--p", "0.5", "--q", "2", "--dynamics", "sb"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(stdout(&out).lines().next().unwrap()).unwrap();
    assert!((v["gap"].as_f64().unwrap() - 0.375).abs() < 1e-12);
    assert_eq!(v["dim"], 2);

    let out = rcdyn(&["gap", "--graph", "path:2", "--p", "0.5", "--q", "2", "--dynamics", "sw"]);
    let v: serde_json::Value = serde_json::from_str(stdout(&out).lines().next().unwrap()).unwrap();
    assert!((v["gap"].as_f64().unwrap() - 0.75).abs() < 1e-12);
}

#[test]
fn parameter_error_exits_2() {
    let out = rcdyn(&["gap", "--graph", "path:2", "--p", "1.5", "--q", "2"]);
    assert_eq!(out.status.code(), Some(2));
    let out = rcdyn(&["gap", "--graph", "path:2", "--p", "0.5", "--q", "2", "--dynamics", "xx"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn cap_error_exits_3() {
    let out = Command::new(env!("CARGO_BIN_EXE_rcdyn"))
        .args(["gap", "--graph", "cycle:4", "--p", "0.5", "--q", "2"])
        .env("RCDYN_MAX_STATES", "8")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn verify_single_suite() {
    let out = rcdyn(&["verify", "--suite", "width"]);
    assert!(out.status.success());
    let last = stdout(&out);
    let v: serde_json::Value = serde_json::from_str(last.lines().last().unwrap()).unwrap();
    assert_eq!(v["suite"], "width");
    assert_eq!(v["pass"], true);
}

#[test]
fn verify_unknown_suite_exits_2() {
    let out = rcdyn(&["verify", "--suite", "nothing"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn census_matches_row() {
    // SW from the empty state on K2 at p=0.5, q=2: row (0.75, 0.25);
    // 3 sigma for 1e5 draws is about 0.0041
    let out = rcdyn(&[
        "sample", "--graph", "path:2", "--p", "0.5", "--q", "2", "--dynamics", "sw",
        "--mode", "census", "--start", "0", "--samples", "100000", "--seed", "0",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines().skip(1);
    let f0: f64 = lines.next().unwrap().split(',').nth(2).unwrap().parse().unwrap();
    let f1: f64 = lines.next().unwrap().split(',').nth(2).unwrap().parse().unwrap();
    assert!((f0 - 0.75).abs() < 0.0042);
    assert!((f1 - 0.25).abs() < 0.0042);
}

#[test]
fn sample_exact_distribution_csv() {
    let out = rcdyn(&[
        "sample", "--graph", "path:2", "--p", "0.5", "--q", "2", "--mode", "exact", "--law", "rc",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let probs: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(probs.len(), 2);
    assert!((probs[0] - 2.0 / 3.0).abs() < 1e-12);
    assert!((probs[1] - 1.0 / 3.0).abs() < 1e-12);
}

#[test]
fn sweep_single_point_matches_gap() {
    let out = rcdyn(&[
        "sweep", "--graph", "path:2", "--ps", "0.5", "--qs", "2", "--dynamics", "sb",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let row = text.lines().nth(1).unwrap();
    let gap: f64 = row.split(',').nth(4).unwrap().parse().unwrap();
    assert!((gap - 0.375).abs() < 1e-12);
}

#[test]
fn bounds_subcommands() {
    let out = rcdyn(&["bounds", "torus", "--p", "0.5", "--q", "2", "--l", "2", "--d", "2"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert!((v["log_bound"].as_f64().unwrap() - 14.081803).abs() < 1e-5);

    let out = rcdyn(&["bounds", "width", "--graph", "cycle:5"]);
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(v["bandwidth"], 2);

    let out = rcdyn(&["bounds", "tree", "--graph", "path:4", "--p", "0.5", "--q", "2"]);
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert!((v["gap"].as_f64().unwrap() - 0.75 / 6.0).abs() < 1e-12);

    // non-tree input is a parameter error
    let out = rcdyn(&["bounds", "tree", "--graph", "cycle:3", "--p", "0.5", "--q", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn graph_file_roundtrip() {
    let dir = std::env::temp_dir().join("rcdyn-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("tri.json");
    let out = rcdyn(&["graph", "--graph", "cycle:3", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let out = rcdyn(&["gap", "--graph", path.to_str().unwrap(), "--p", "0.5", "--q", "2"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(stdout(&out).lines().next().unwrap()).unwrap();
    assert_eq!(v["dim"], 8);
}
