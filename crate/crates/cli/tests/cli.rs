use std::process::Command;

fn ptt() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ptt"))
}

#[test]
fn verify_exits_zero_and_writes_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = ptt().args(["verify", "--n", "16", "--out"]).arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.lines().any(|l| l.starts_with("PASS green_exactness")));
    assert!(dir.path().join("summary.txt").exists());
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "lambda=2\n").unwrap();
    let out = ptt().args(["global", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("lambda"));
    let out = ptt().args(["blowup", "--n", "9"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("big.cfg");
    std::fs::write(&cfg, "scenario=global\ndelta0=10\nc0=100\nn=8\n").unwrap();
    let out = ptt().args(["global", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn flags_override_config_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("b.cfg");
    std::fs::write(&cfg, "# short run\nscenario=blowup\nn=32\nparticles=4\n").unwrap();
    let out = ptt()
        .args(["blowup", "--config"])
        .arg(&cfg)
        .args(["--n", "8", "--dt", "2e-3", "--t-max", "1", "--seed", "3", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    let summary = std::fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    assert!(summary.contains("# n=8"));
    assert!(summary.contains("# seed=3"));
    assert!(summary.contains("predicted_time="));
    assert!(matches!(out.status.code(), Some(0 | 1)));
}
