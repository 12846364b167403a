use std::process::Command;

fn polyflow() -> Command {
    Command::new(env!("CARGO_BIN_EXE_polyflow"))
}

#[test]
fn selftest_passes() {
    let out = polyflow().arg("selftest").output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{text}");
    assert!(text.contains("0 failed"), "{text}");
}

#[test]
fn pathology_prints_entropy_and_bound() {
    let out = polyflow().args(["pathology", "--nmax", "100", "--t", "0.5"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("entropy at t = 0.5 with 100 bumps"), "{text}");
}

#[test]
fn bad_config_exits_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.cfg");
    std::fs::write(&path, "T = 1\nq = 2\nclosure = exact_hookean\n").unwrap();
    let out = polyflow().arg("run").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("exact closure requires q=1"));
}

#[test]
fn run_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("small.cfg");
    std::fs::write(&path, "nx = 8\nnm = 16\nL_m = 6\ndt = 0.01\nT = 0.02\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = polyflow().arg("--quiet").arg("--output-dir").arg(&out_dir).arg("run").arg(&path).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("energy.csv").exists());
}
