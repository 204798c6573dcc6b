//! Exit-code and validation-message behavior of the kslab binary.

use std::process::Command;

fn kslab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kslab"))
}

#[test]
fn incommensurate_grid_exits_one_with_minimal_n() {
    let out = kslab()
        .args(["check-relations", "--n", "3", "--grid", "100"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("divisible by 12"),
        "stderr should name the divisor: {stderr}"
    );
    assert!(
        stderr.contains("minimal valid N: 108"),
        "stderr should name the minimal grid: {stderr}"
    );
}

#[test]
fn bad_delta_exits_one_naming_the_precondition() {
    let out = kslab()
        .args(["audit", "--n", "4", "--grid", "512", "--delta", "0.6"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("delta"), "stderr: {stderr}");
}

#[test]
fn unknown_command_exits_one() {
    let out = kslab().args(["frobnicate"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn malformed_state_spec_exits_one() {
    let out = kslab()
        .args([
            "check-relations",
            "--n",
            "1",
            "--grid",
            "512",
            "--state",
            "gaussian:x0=0.0,p0=0.0",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("sigma"), "stderr: {stderr}");
}

#[test]
fn unwritable_output_path_exits_one() {
    let out = kslab()
        .args([
            "fantasy-check",
            "--bound",
            "5",
            "--out",
            "/nonexistent-dir/cert.json",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("cannot write"), "stderr: {stderr}");
}

#[test]
fn successful_runs_exit_zero() {
    let out = kslab()
        .args(["fantasy-check", "--bound", "10"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("contradiction established: true"));

    let out = kslab().args(["mermin"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("consistent assignments: 0 of 16"));
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(kslab().arg("--help").output().unwrap().status.code(), Some(0));
    assert_eq!(
        kslab().arg("--version").output().unwrap().status.code(),
        Some(0)
    );
}

#[test]
fn thread_cap_env_var_is_accepted() {
    let out = kslab()
        .env("KSLAB_THREADS", "2")
        .args([
            "sweep-disturbance",
            "--n-list",
            "2,4",
            "--grid",
            "512",
            "--k-max",
            "1",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}
