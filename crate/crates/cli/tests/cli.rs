use std::path::Path;
use std::process::{Command, Output};

use arcspline::io::curve_from_json;

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_arcspline"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn synth(dir: &Path) {
    let out = run(&["synth", "--seed", "1", "-o", "scan.csv"], dir);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn report_reproduces_pentagon_table() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path());
    let out = run(&["report", "scan.csv", "--closed", "--report-tolerances", "1.5,1.0,0.5"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split_whitespace().collect()).collect();
    assert_eq!(rows, vec![vec!["1.5", "5", "0", "0"], vec!["1.0", "5", "0", "0"], vec!["0.5", "5", "0", "0"]]);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path());
    let first = std::fs::read(dir.path().join("scan.csv")).unwrap();
    synth(dir.path());
    assert_eq!(first, std::fs::read(dir.path().join("scan.csv")).unwrap());
    for format in ["json", "svg", "gcode"] {
        let a = run(&["pipeline", "scan.csv", "--closed", "--smoothing", "biarc", "--format", format], dir.path());
        let b = run(&["pipeline", "scan.csv", "--closed", "--smoothing", "biarc", "--format", format, "--sequential"], dir.path());
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{format}");
    }
}

#[test]
fn pipeline_json_reads_back() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path());
    let out = run(&["pipeline", "scan.csv", "--closed", "-o", "curve.json"], dir.path());
    assert!(out.status.success());
    let curve = curve_from_json(&std::fs::read_to_string(dir.path().join("curve.json")).unwrap()).unwrap();
    assert_eq!(curve.len(), 5);
    let smoothed = run(&["smooth", "scan.csv", "--curve", "curve.json", "--smoothing", "fillet", "--closed"], dir.path());
    assert!(smoothed.status.success(), "{}", String::from_utf8_lossy(&smoothed.stderr));
    assert!(curve_from_json(&String::from_utf8(smoothed.stdout).unwrap()).unwrap().len() > 5);
}

#[test]
fn gcode_preamble_and_moves() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("line.csv"), "x,y\n0,0\n1,0\n2,0\n3,0\n4,0\n").unwrap();
    let out = run(&["fit", "line.csv", "--format", "gcode"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines, ["G21", "G90", "G0 X0.0000 Y0.0000", "G1 X4.0000 Y0.0000"]);
}

#[test]
fn corners_report_is_json() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path());
    let out = run(&["corners", "scan.csv", "--closed"], dir.path());
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["corners"].as_array().unwrap().len(), 5);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("dup.csv"), "0,0\n0,0\n").unwrap();
    std::fs::write(dir.path().join("junk.csv"), "0,0\n1,zz\n").unwrap();
    assert_eq!(run(&["fit", "dup.csv"], dir.path()).status.code(), Some(2));
    let junk = run(&["pipeline", "junk.csv"], dir.path());
    assert_eq!(junk.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&junk.stderr).contains("line 2"));
    assert_eq!(run(&["fit", "missing.csv"], dir.path()).status.code(), Some(2));

    std::fs::write(dir.path().join("two.csv"), "0,0\n1,0\n").unwrap();
    assert_eq!(run(&["corners", "two.csv", "--eps-turn", "1.5"], dir.path()).status.code(), Some(4));
    assert_eq!(run(&["pipeline", "two.csv", "--m-limit", "2"], dir.path()).status.code(), Some(4));
    assert_eq!(run(&["fit", "two.csv", "--tolerance=-1"], dir.path()).status.code(), Some(3));
}
