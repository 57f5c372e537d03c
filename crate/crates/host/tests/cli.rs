use std::io::Write;
use std::process::{Command, Output, Stdio};

fn rtdevs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rtdevs"))
        .args(args)
        .stdin(Stdio::null())
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

#[test]
fn simulate_prints_header_and_initial_states() {
    let out = rtdevs(&["simulate", "blinky", "--duration", "1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines,
        [
            "time;model_id;model_name;port_name;data",
            "0;1;blinky;;Status:, 0, sigma: 0.5",
            "0.5;1;blinky;out;1",
            "0.5;1;blinky;;Status:, 1, sigma: 0.5",
            "1;1;blinky;out;0",
            "1;1;blinky;;Status:, 0, sigma: 0.5",
        ]
    );
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["simulate", "blinky", "--duration", "-1"][..],
        &["simulate", "blinky"],
        &["simulate", "nope", "--duration", "1"],
        &["launch", "blinky"],
        &["simulate", "blinky", "--duration", "1", "--gen-script", "3,2"],
    ] {
        let out = rtdevs(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(out.stdout.is_empty());
        assert!(!stderr(&out).is_empty());
    }
}

#[test]
fn runs_are_deterministic() {
    let args = [
        "simulate",
        "blinky",
        "--duration",
        "120",
        "--gen-seed",
        "99",
        "--gen-min",
        "0.2",
        "--gen-max",
        "4",
    ];
    let a = rtdevs(&args);
    let b = rtdevs(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).contains(";2;generator;out;"));

    let mock = [
        "run-rt",
        "blinky",
        "--duration",
        "30",
        "--clock",
        "mock",
        "--mock-costs-us",
        "120000,900000,3",
    ];
    assert_eq!(rtdevs(&mock).stdout, rtdevs(&mock).stdout);
}

#[test]
fn halt_exits_1_and_names_the_slip() {
    let out = rtdevs(&[
        "run-rt",
        "blinky",
        "--duration",
        "5",
        "--tolerance-us",
        "0",
        "--clock",
        "mock",
        "--mock-costs-us",
        "500001",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).ends_with("MISSED SCHEDULED TIME ADVANCE DEADLINE BY:1 microseconds\n"));
    assert!(
        stderr(&out).contains("accumulated scheduler slip 1 us"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn misses_within_tolerance_continue() {
    let out = rtdevs(&[
        "run-rt",
        "blinky",
        "--duration",
        "3",
        "--tolerance-us",
        "100000",
        "--clock",
        "mock",
        "--mock-costs-us",
        "585629",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let miss = text
        .find("MISSED SCHEDULED TIME ADVANCE DEADLINE BY:85629 microseconds\n")
        .unwrap();
    assert!(text[miss..].contains("1;1;blinky;out;0"));
    assert!(text.ends_with("3;1;blinky;;Status:, 0, sigma: 0.5\n"));
}

#[test]
fn log_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.csv");
    let out = rtdevs(&["simulate", "blinky", "--duration", "2", "--log", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    assert_eq!(written, stdout(&rtdevs(&["simulate", "blinky", "--duration", "2"])));
}

#[test]
fn unwritable_log_exits_1() {
    let out = rtdevs(&[
        "simulate",
        "blinky",
        "--duration",
        "2",
        "--log",
        "/nonexistent/dir/trace.csv",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("/nonexistent/dir/trace.csv"));
}

#[test]
fn pin_script_drives_deployment_wiring() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pins.txt");
    std::fs::write(&path, "# press and release\n1.6 1\n2.35 0\n").unwrap();
    let out = rtdevs(&[
        "simulate",
        "blinky",
        "--duration",
        "4",
        "--pin-script",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("\n0;2;digitalOutput;;Pin: 0\n"));
    assert!(text.contains("\n1.6;3;digitalInput;out;1\n"));
    // release seen at the 2.4 s poll
    assert!(text.contains("\n2.4;3;digitalInput;out;0\n"));
    assert!(!text.contains("generator"));
}

#[test]
fn bad_pin_script_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pins.txt");
    std::fs::write(&path, "2 1\n1 0\n").unwrap();
    let out = rtdevs(&[
        "simulate",
        "blinky",
        "--duration",
        "4",
        "--pin-script",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));
}

#[test]
fn stdin_newlines_toggle_the_input_pin() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_rtdevs"))
        .args([
            "run-rt",
            "blinky",
            "--duration",
            "0.6",
            "--pin-script",
            "stdin",
            "--sigma1",
            "0.2",
        ])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"\n").unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.matches(";3;digitalInput;out;1").count(), 1, "{text}");
}

#[test]
fn host_clock_run_completes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.txt");
    std::fs::write(&path, "").unwrap();
    let start = std::time::Instant::now();
    let out = rtdevs(&[
        "run-rt",
        "blinky",
        "--duration",
        "2",
        "--pin-script",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(start.elapsed() >= std::time::Duration::from_secs(2));
    let text = stdout(&out);
    let toggles = text
        .lines()
        .filter(|l| l.contains(";1;blinky;out;") || l.contains(";2;digitalOutput;;"))
        .count();
    // four blinks, each driven to the pin, plus the initial pin line
    assert_eq!(toggles, 9);
}
