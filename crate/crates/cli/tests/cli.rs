use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qwalk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qwalk")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_writes_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let o = qwalk(&["run", "--out", arg(&out), "--seed", "3", "--shots", "1000", "--t-max", "20"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let prob = fs::read_to_string(out.join("probability.csv")).unwrap();
    let last = prob.lines().last().unwrap();
    assert!(last.starts_with("20,0.9999999999"), "{last}");
    assert!(out.join("manifest.toml").exists());

    let again = dir.path().join("p");
    let o = qwalk(&["run", "--config", arg(&out.join("manifest.toml")), "--out", arg(&again)]);
    assert_eq!(code(&o), 0);
    assert_eq!(prob, fs::read_to_string(again.join("probability.csv")).unwrap());
}

#[test]
fn noise_and_dd_flags() {
    let dir = tempfile::tempdir().unwrap();
    let noise = dir.path().join("noise.toml");
    fs::write(&noise, "p1 = 0.001\np2 = 0.001\n").unwrap();
    let out = dir.path().join("o");
    let o = qwalk(&[
        "run", "--cycle", "3", "--t-max", "4", "--shots", "0", "--noise", arg(&noise), "--dd", "xy4", "--opt", "1",
        "--out", arg(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let prob = fs::read_to_string(out.join("probability.csv")).unwrap();
    assert!(prob.starts_with("t,exact,noisy\n"));
    let manifest = fs::read_to_string(out.join("manifest.toml")).unwrap();
    assert!(manifest.contains("dd = \"xy4\"") && manifest.contains("opt_level = 1"));
    assert!(manifest.contains("pattern = \"A'A'B'B'\""));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[run]\nopt_level = 2\n").unwrap();
    let o = qwalk(&["run", "--config", arg(&bad)]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("run.opt_level"));

    assert_eq!(code(&qwalk(&["run", "--opt", "2"])), 2);
    assert_eq!(code(&qwalk(&["run", "--dd", "xy8"])), 2);
    assert_eq!(code(&qwalk(&["run", "--pattern", "AXB"])), 2);
    assert_eq!(code(&qwalk(&["run", "--config", arg(&dir.path().join("missing.toml"))])), 2);
    assert_eq!(code(&qwalk(&["depth-report", "--cycle", "5"])), 2);
    assert_eq!(code(&qwalk(&["period-scan", "--cycle", "4", "--coin", "1.5"])), 2);
    assert_eq!(code(&qwalk(&["nonsense"])), 2);
}

#[test]
fn runtime_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("f");
    fs::write(&file, "x").unwrap();
    let o = qwalk(&["run", "--t-max", "1", "--out", arg(&file.join("sub"))]);
    assert_eq!(code(&o), 1);
}

#[test]
fn period_scan_prints_both_modes() {
    let dir = tempfile::tempdir().unwrap();
    let o = qwalk(&["period-scan", "--cycle", "8", "--out", arg(dir.path())]);
    assert_eq!(code(&o), 0);
    let s = stdout(&o);
    assert!(s.contains("strict") && s.contains("insensitive"));
    assert!(s.contains("period 24"));
    let csv = fs::read_to_string(dir.path().join("period.csv")).unwrap();
    assert!(csv.contains("power,insensitive,24,"));

    let s = stdout(&qwalk(&["period-scan", "--cycle", "3", "--coin", "0.5", "--t-max", "200"]));
    assert!(s.contains("none up to 200"));
}

#[test]
fn depth_report_to_stdout() {
    let o = qwalk(&["depth-report", "--cycle", "3", "--opt", "0", "--t-max", "3"]);
    assert_eq!(code(&o), 0);
    let s = stdout(&o);
    let rows: Vec<&str> = s.lines().collect();
    assert_eq!(rows[0], "t,logical_depth,native_depth,count_1q,count_2q");
    let logical: Vec<&str> = rows[1..].iter().map(|r| r.split(',').nth(1).unwrap()).collect();
    assert_eq!(logical, ["17", "20", "23"]);
}

#[test]
fn dump_circuit_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let o = qwalk(&["dump-circuit", "--t", "2", "--native", "--out", arg(dir.path())]);
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(dir.path().join("circuit_4cycle_t2_native.txt")).unwrap();
    let (c, times) = qwalk::circuit::text::from_text(&text).unwrap();
    assert!(c.is_native());
    assert_eq!(times.unwrap().len(), c.len());

    let s = stdout(&qwalk(&["dump-circuit", "--t", "1", "--cycle", "3"]));
    assert!(s.starts_with("width=3 name=walk3_t1 measure=0,1\n"));
    assert!(s.contains("\nP 0 -4.18879020478639"));
}
