//! End-to-end smoke tests of the `privpath` binary: a real TCP session
//! between both roles, a one-trial benchmark, and the simulator/probe
//! subcommands driven from config files.

use std::io::Read;
use std::process::{Child, Command, Stdio};
use std::time::Duration;

fn privpath() -> Command {
    Command::new(env!("CARGO_BIN_EXE_privpath"))
}

fn wait_with_output(mut child: Child) -> (String, String, bool) {
    let status = child.wait().expect("child wait");
    let mut stdout = String::new();
    let mut stderr = String::new();
    if let Some(mut s) = child.stdout.take() {
        s.read_to_string(&mut stdout).ok();
    }
    if let Some(mut s) = child.stderr.take() {
        s.read_to_string(&mut stderr).ok();
    }
    (stdout, stderr, status.success())
}

#[test]
fn tcp_session_between_roles() {
    let dir = tempfile::tempdir().unwrap();
    let alice_route = dir.path().join("alice.route");
    let bob_route = dir.path().join("bob.route");
    std::fs::write(&alice_route, "0,0\n10,10\n").unwrap();
    std::fs::write(&bob_route, "0,10\n10,0\n").unwrap();

    let addr = "127.0.0.1:47411";
    let bob = privpath()
        .args([
            "run",
            "--role",
            "bob",
            "--listen",
            addr,
            "--path",
            bob_route.to_str().unwrap(),
            "--key-bits",
            "1024",
        ])
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    // keygen at 1024 bits takes a moment; give the listener time to come up
    std::thread::sleep(Duration::from_secs(3));

    let alice = privpath()
        .args([
            "run",
            "--role",
            "alice",
            "--connect",
            addr,
            "--path",
            alice_route.to_str().unwrap(),
        ])
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();

    let (alice_out, alice_err, alice_ok) = wait_with_output(alice);
    assert!(alice_ok, "alice failed: {alice_err}");
    assert!(
        alice_out.contains("colliding_segments=0"),
        "unexpected alice output: {alice_out}"
    );
    let (bob_out, bob_err, bob_ok) = wait_with_output(bob);
    assert!(bob_ok, "bob failed: {bob_err}");
    assert!(bob_out.contains("session complete"), "{bob_out}");
}

#[test]
fn bench_single_trial_writes_parseable_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let child = privpath()
        .args([
            "bench",
            "--trials",
            "1",
            "--key-bits",
            "1024",
            "--seed",
            "7",
            "--coord-range",
            "-99:99",
            "--out",
            out.to_str().unwrap(),
        ])
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let (stdout, stderr, ok) = wait_with_output(child);
    assert!(ok, "bench failed: {stderr}");
    assert!(stdout.contains("trial=1"), "{stdout}");
    assert!(stdout.contains("reference:"), "{stdout}");
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(parsed["trials"], 1);
    assert_eq!(parsed["records"][0]["trial"], 1);
}

#[test]
fn sim_and_probe_from_config_files() {
    let dir = tempfile::tempdir().unwrap();
    let sim_cfg = dir.path().join("sim.toml");
    std::fs::write(
        &sim_cfg,
        r#"
[sim]
initiation_range = 40.0
default_altitude = 50.0
avoid_delta = 10.0
key_bits = 1024

[[drones]]
id = "a"
speed = 2.0
points = [[0, 0], [20, 0]]

[[drones]]
id = "b"
speed = 2.0
points = [[10, -10], [10, 10]]
"#,
    )
    .unwrap();
    let trace = dir.path().join("trace.log");
    let child = privpath()
        .args([
            "sim",
            "--config",
            sim_cfg.to_str().unwrap(),
            "--out",
            trace.to_str().unwrap(),
        ])
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let (_, stderr, ok) = wait_with_output(child);
    assert!(ok, "sim failed: {stderr}");
    let trace_text = std::fs::read_to_string(&trace).unwrap();
    assert!(trace_text.contains("engage"), "{trace_text}");
    assert!(trace_text.lines().all(|l| l.starts_with("tick=")));

    let probe_cfg = dir.path().join("probe.toml");
    std::fs::write(
        &probe_cfg,
        r#"
[probe]
x_min = 0
x_max = 12
y_min = 0
y_max = 12
spacing = 6
seg_len = 6
key_bits = 1024

[victim]
points = [[1, 1], [11, 9]]
"#,
    )
    .unwrap();
    let report = dir.path().join("probe.json");
    let child = privpath()
        .args([
            "probe",
            "--config",
            probe_cfg.to_str().unwrap(),
            "--out",
            report.to_str().unwrap(),
        ])
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let (stdout, stderr, ok) = wait_with_output(child);
    assert!(ok, "probe failed: {stderr}");
    assert!(stdout.contains("probe_segments="), "{stdout}");
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert!(parsed["probe_segments"].as_u64().unwrap() > 0);
    assert!(parsed["extrapolated_hours_1km2_1m"].as_f64().unwrap() > 0.0);
}
