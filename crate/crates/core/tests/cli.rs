use std::process::Command;

fn anderson() -> Command {
    Command::new(env!("CARGO_BIN_EXE_anderson"))
}

#[test]
fn free_chain_spectrum() {
    let out = anderson().args(["spectrum", "--d", "1", "--L", "4"]).output().unwrap();
    assert!(out.status.success());
    let values: Vec<f64> = String::from_utf8(out.stdout).unwrap().lines().map(|l| l.parse().unwrap()).collect();
    assert_eq!(values, vec![-2.0, 0.0, 0.0, 2.0]);
}

#[test]
fn exit_codes() {
    let bad_lattice = anderson().args(["spectrum", "--d", "1", "--L", "2"]).output().unwrap();
    assert_eq!(bad_lattice.status.code(), Some(2));
    let bad_flag = anderson().args(["spectrum", "--nope"]).output().unwrap();
    assert_eq!(bad_flag.status.code(), Some(2));
    let missing = anderson().args(["run", "/nonexistent/file.toml"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn ldp_writes_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = anderson()
        .args(["ldp", "--d", "1", "--L", "200", "--lambda", "4", "--expected", "30", "-R", "20"])
        .args(["--ids-realizations", "20", "--workers", "1", "--output-root"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summaries: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summaries[0]["statistic"], "large_deviation");
    assert!(dir.path().join("ldp/ldp_counts.csv").exists());
}
