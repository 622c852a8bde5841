use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

fn crossview(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crossview"))
        .args(args)
        .output()
        .unwrap()
}

fn with_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_crossview"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn simulate(dir: &Path, spec: &str) -> std::path::PathBuf {
    let spec_path = dir.join("spec.json");
    fs::write(&spec_path, spec).unwrap();
    let out = dir.join("scene");
    let r = crossview(&["simulate", "--spec", s(&spec_path), "--out-dir", s(&out)]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    out
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn help_documents_every_flag() {
    let cases: &[(&str, &[&str])] = &[
        ("track", &["--calib", "--config", "--input", "--output", "--joints"]),
        ("simulate", &["--spec", "--out-dir"]),
        (
            "evaluate",
            &[
                "--truth",
                "--tracks",
                "--report",
                "--mot",
                "--mot-threshold",
                "--framerate-sweep",
                "--calib",
                "--frames",
                "--config",
                "--joints",
                "--pcp-alpha",
            ],
        ),
        (
            "bench",
            &[
                "--cameras",
                "--people",
                "--duration",
                "--baseline",
                "--layout",
                "--seed",
                "--config",
                "--output",
            ],
        ),
    ];
    for (cmd, flags) in cases {
        let long = String::from_utf8(crossview(&[cmd, "--help"]).stdout).unwrap();
        let r = crossview(&[cmd, "-h"]);
        assert!(r.status.success());
        let help = String::from_utf8(r.stdout).unwrap();
        for flag in *flags {
            // `  --flag <V>   Description`: the flag followed by its text.
            let documented = help.lines().any(|l| {
                let mut cols = l.trim_start().splitn(2, "  ");
                let head = cols.next().unwrap_or("");
                let desc = cols.next().unwrap_or("").trim();
                head.split_whitespace().next() == Some(*flag) && !desc.is_empty()
            });
            assert!(documented, "{cmd}: {flag} undocumented");
            assert!(long.contains(flag));
        }
    }
    let top = String::from_utf8(crossview(&["--help"]).stdout).unwrap();
    for cmd in ["track", "simulate", "evaluate", "bench"] {
        assert!(top.contains(cmd));
    }
}

#[test]
fn empty_input_gives_empty_output() {
    let dir = tempfile::tempdir().unwrap();
    let scene = simulate(dir.path(), r#"{"duration":0.2}"#);
    let calib = scene.join("calibration.jsonl");
    let r = with_stdin(&["track", "--calib", s(&calib)], "");
    assert!(r.status.success());
    assert!(r.stdout.is_empty());
    let r = with_stdin(&["track", "--calib", s(&calib), "--input", "-"], "\n\n");
    assert!(r.status.success());
    assert!(r.stdout.is_empty());
}

#[test]
fn frames_without_people_write_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let scene = simulate(dir.path(), r#"{"duration":0.2}"#);
    let calib = scene.join("calibration.jsonl");
    let input = "{\"camera_id\":\"cam0\",\"timestamp\":0.0,\"detections\":[]}\n\
                 {\"camera_id\":\"cam1\",\"timestamp\":\"0.01\",\"detections\":[]}\n";
    let r = with_stdin(&["track", "--calib", s(&calib)], input);
    assert!(r.status.success());
    assert!(r.stdout.is_empty());
}

#[test]
fn simulate_track_evaluate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let scene = simulate(dir.path(), r#"{"seed":3,"duration":3,"people":2}"#);
    for f in [
        "calibration.jsonl",
        "frames.jsonl",
        "truth.jsonl",
        "scenario.json",
        "tracker.json",
    ] {
        assert!(scene.join(f).exists(), "{f}");
    }
    let tracks = dir.path().join("tracks.jsonl");
    let r = crossview(&[
        "track",
        "--calib",
        s(&scene.join("calibration.jsonl")),
        "--config",
        s(&scene.join("tracker.json")),
        "--input",
        s(&scene.join("frames.jsonl")),
        "--output",
        s(&tracks),
    ]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let lines = fs::read_to_string(&tracks).unwrap();
    let first: serde_json::Value = serde_json::from_str(lines.lines().next().unwrap()).unwrap();
    for key in ["timestamp", "camera_id", "targets", "associations"] {
        assert!(first.get(key).is_some(), "{key}");
    }

    let report = dir.path().join("report.json");
    let r = crossview(&[
        "evaluate",
        "--truth",
        s(&scene.join("truth.jsonl")),
        "--tracks",
        s(&tracks),
        "--report",
        s(&report),
        "--mot",
        "--framerate-sweep",
        "1,2",
    ]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let v = json(&report);
    assert_eq!(v["pcp"]["whole"]["percent"], 100.0);
    assert!(v["association"]["overall"]["percent"].as_f64().unwrap() > 99.0);
    assert!(v["association"]["per_camera"]["cam0"].is_object());
    assert_eq!(v["mot"]["variant"], "simplified");
    assert!(v["mot"]["per_camera"]["cam2"]["mota"].as_f64().unwrap() > 90.0);
    let sweep = v["framerate_sweep"].as_array().unwrap();
    assert_eq!(sweep.len(), 2);
    assert_eq!(sweep[0]["n"], 1);
    let table = fs::read_to_string(dir.path().join("report.sweep.tsv")).unwrap();
    assert_eq!(table.lines().count(), 3);
    assert!(table.starts_with("n\tweighted_pcp\tplain_pcp\tmean_time_difference"));
}

#[test]
fn outputs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let spec = r#"{"seed":9,"duration":1,"people":3,"pixel_noise":2,"dropout":0.1,"jitter":0.003}"#;
    let run = |sub: &str| {
        let d = dir.path().join(sub);
        fs::create_dir_all(&d).unwrap();
        let scene = simulate(&d, spec);
        let tracks = d.join("tracks.jsonl");
        assert!(crossview(&[
            "track",
            "--calib",
            s(&scene.join("calibration.jsonl")),
            "--input",
            s(&scene.join("frames.jsonl")),
            "--output",
            s(&tracks),
        ])
        .status
        .success());
        let report = d.join("report.json");
        assert!(crossview(&[
            "evaluate",
            "--truth",
            s(&scene.join("truth.jsonl")),
            "--tracks",
            s(&tracks),
            "--report",
            s(&report),
            "--mot",
        ])
        .status
        .success());
        ["scene/frames.jsonl", "scene/truth.jsonl", "tracks.jsonl", "report.json"].map(|f| fs::read(d.join(f)).unwrap())
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn bench_emits_one_row_per_case() {
    let r = crossview(&[
        "bench",
        "--cameras",
        "2,3,4,6",
        "--people",
        "1",
        "--duration",
        "0.2",
        "--baseline",
    ]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let text = String::from_utf8(r.stdout).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers = rdr.headers().unwrap().clone();
    assert!(headers.iter().any(|h| h == "fps"));
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 4);
    let cams: Vec<&str> = rows.iter().map(|r| &r[1]).collect();
    assert_eq!(cams, ["2", "3", "4", "6"]);
    assert!(rows.iter().all(|r| !r[10].is_empty()));

    let grid = crossview(&[
        "bench",
        "--cameras",
        "6",
        "--people",
        "2",
        "--duration",
        "0.2",
        "--layout",
        "grid",
    ]);
    assert!(grid.status.success());
    assert!(String::from_utf8(grid.stdout).unwrap().contains("grid,6,2"));
}

#[test]
fn failures_exit_nonzero_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let scene = simulate(dir.path(), r#"{"duration":0.2}"#);
    let calib = scene.join("calibration.jsonl");

    let r = with_stdin(&["track", "--calib", s(&calib)], "not json\n");
    assert!(!r.status.success());
    assert!(String::from_utf8_lossy(&r.stderr).contains("line 1"));

    let unknown = "{\"camera_id\":\"nope\",\"timestamp\":0.0,\"detections\":[]}\n";
    let r = with_stdin(&["track", "--calib", s(&calib)], unknown);
    assert!(!r.status.success());
    assert!(String::from_utf8_lossy(&r.stderr).contains("nope"));

    let r = crossview(&["track", "--calib", s(&dir.path().join("missing.jsonl"))]);
    assert!(!r.status.success());

    let bad_spec = dir.path().join("bad.json");
    fs::write(&bad_spec, r#"{"duration":-1}"#).unwrap();
    let r = crossview(&[
        "simulate",
        "--spec",
        s(&bad_spec),
        "--out-dir",
        s(&dir.path().join("x")),
    ]);
    assert!(!r.status.success());

    let r = crossview(&["bench", "--cameras", "0", "--people", "1", "--duration", "1"]);
    assert!(!r.status.success());
    let r = crossview(&["bench", "--cameras", "a,b", "--people", "1", "--duration", "1"]);
    assert!(!r.status.success());
}
