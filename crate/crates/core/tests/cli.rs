use std::path::Path;
use std::process::{Command, Output};

use chunksched::metrics::read_csv;
use chunksched::{SimConfig, Strategy};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chunksched"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path) -> String {
    let mut cfg = SimConfig::desk_scale(Strategy::AsSched, 2, 100);
    cfg.node_count = 12;
    cfg.degree = 4;
    cfg.duration = 5;
    cfg.window_seconds = 3;
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn run_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();
    for format in ["csv", "json"] {
        let o = cli(&[
            "run",
            "--config",
            &config,
            "--strategy",
            "rr",
            "--seed",
            "4",
            "--out",
            out,
            "--format",
            format,
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let rows = read_csv(&Path::new(out).join("rr_seed4.csv")).unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows
        .iter()
        .all(|r| r.seed == 4 && r.strategy == Strategy::Rr));
    let json = std::fs::read_to_string(Path::new(out).join("rr_seed4.json")).unwrap();
    let value: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(value["duplicate_request_count"], 0);
}

#[test]
fn sweep_writes_rows_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let out = dir.path().join("sweep");
    let o = cli(&[
        "sweep",
        "--config",
        &config,
        "--strategies",
        "assched,rnd",
        "--rates",
        "200,300",
        "--windows",
        "3",
        "--seeds",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    // 2 strategies x 2 rates x 2 seeds, 3 rows each
    assert_eq!(read_csv(&out.join("sweep.csv")).unwrap().len(), 24);
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + 2 * 2 * 3);
}

#[test]
fn solve_assignment_and_knapsack() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = dir.path().join("m.csv");
    std::fs::write(&matrix, "4,1,x\n2,0,5\n3,3,1\n").unwrap();
    let o = cli(&["solve", "--matrix", matrix.to_str().unwrap()]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    // 4 + 5 + 3 beats every other permutation
    assert_eq!(v["objective"], 12.0);
    assert_eq!(v["assignment"], serde_json::json!([0, 2, 1]));

    let items = dir.path().join("k.csv");
    std::fs::write(&items, "6,10,12\n1,2,3\n").unwrap();
    let o = cli(&[
        "solve",
        "--matrix",
        items.to_str().unwrap(),
        "--capacity",
        "5",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["value"], 22.0);
}

#[test]
fn bad_config_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\"node_count\": 3, \"surprise\": 1}").unwrap();
    let o = cli(&[
        "run",
        "--config",
        path.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let missing = cli(&["run", "--config", "/nonexistent.json", "--out", "/tmp"]);
    assert_eq!(missing.status.code(), Some(2));
    let matrix = dir.path().join("m.csv");
    std::fs::write(&matrix, "1,oops\n2,3\n").unwrap();
    assert_eq!(
        cli(&["solve", "--matrix", matrix.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}
