use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use linescan::records::PlateReading;
use linescan::synth::GroundTruthRecord;

fn linescan(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_linescan"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = linescan(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn fails(dir: &Path, args: &[&str]) -> String {
    let out = linescan(dir, args);
    assert!(!out.status.success(), "{args:?} should fail");
    String::from_utf8(out.stderr).unwrap()
}

fn synth(dir: &Path, seed: &str, prefix: &str) {
    ok(
        dir,
        &[
            "synth",
            "--seed",
            seed,
            "--vehicles",
            "4",
            "--noise-objects",
            "2",
            "--video",
            &format!("{prefix}.raw"),
            "--truth",
            &format!("{prefix}.jsonl"),
        ],
    );
}

#[test]
fn synth_is_deterministic() {
    let d = tempfile::tempdir().unwrap();
    synth(d.path(), "9", "a");
    synth(d.path(), "9", "b");
    synth(d.path(), "10", "c");
    let read = |n: &str| fs::read(d.path().join(n)).unwrap();
    assert_eq!(read("a.raw"), read("b.raw"));
    assert_eq!(read("a.jsonl"), read("b.jsonl"));
    assert_ne!(read("a.raw"), read("c.raw"));
}

#[test]
fn run_and_eval_perfect_on_clean_video() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    synth(p, "4", "v");
    for m in ["ala", "vr"] {
        ok(
            p,
            &[
                "run",
                m,
                "--input",
                "v.raw",
                "--lambda",
                "300",
                "--events",
                &format!("{m}.jsonl"),
                "--detector",
                "glyph",
                "--readings",
                &format!("{m}-r.jsonl"),
            ],
        );
        let table = ok(
            p,
            &[
                "eval",
                "--events",
                &format!("{m}.jsonl"),
                "--truth",
                "v.jsonl",
                "--readings",
                &format!("{m}-r.jsonl"),
                "--delta",
                "2",
                "--iou",
                "0.8",
                "--report",
                &format!("{m}-report.json"),
            ],
        );
        assert!(table.contains("100.0% |  100.0% |  100.0%"), "{table}");
        assert!(table.contains("28/28"), "{table}");
        let report: serde_json::Value =
            serde_json::from_slice(&fs::read(p.join(format!("{m}-report.json"))).unwrap()).unwrap();
        assert_eq!(report["extraction"]["f_score"], 1.0);
        assert_eq!(report["ocr_accuracy"], 1.0);
    }
    // same number of events from both methods
    let count = |n: &str| fs::read_to_string(p.join(n)).unwrap().lines().count();
    assert_eq!(count("ala.jsonl"), count("vr.jsonl"));
}

#[test]
fn shorthand_and_config_file() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    synth(p, "5", "v");
    fs::write(
        p.join("cfg.txt"),
        "lambda = 300\ngamma = 100\nbgsub.kind = mog2\n",
    )
    .unwrap();
    ok(
        p,
        &[
            "ala", "--input", "v.raw", "--config", "cfg.txt", "--events", "a.jsonl",
        ],
    );
    ok(
        p,
        &[
            "run", "ala", "--input", "v.raw", "--lambda", "300", "--events", "b.jsonl",
        ],
    );
    assert_eq!(
        fs::read(p.join("a.jsonl")).unwrap(),
        fs::read(p.join("b.jsonl")).unwrap()
    );
    // a flag overrides the file
    let e = fails(
        p,
        &[
            "ala", "--input", "v.raw", "--config", "cfg.txt", "--lambda", "480", "--events",
            "c.jsonl",
        ],
    );
    assert!(e.contains("scan row 480"), "{e}");
}

#[test]
fn lambda_past_frame_fails_before_output() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    synth(p, "1", "v");
    for m in ["ala", "vr"] {
        let e = fails(p, &["run", m, "--input", "v.raw", "--events", "e.jsonl"]);
        assert!(e.contains("scan row 1000"), "{e}");
        assert!(!p.join("e.jsonl").exists());
    }
}

#[test]
fn input_errors() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    fails(p, &["ala", "--input", "missing.raw", "--events", "e.jsonl"]);
    fs::write(p.join("bad.raw"), b"JUNKJUNKJUNKJUNK").unwrap();
    let e = fails(p, &["ala", "--input", "bad.raw", "--events", "e.jsonl"]);
    assert!(e.contains("malformed header"), "{e}");
    fails(
        p,
        &[
            "synth",
            "--scenario",
            "nope.json",
            "--video",
            "v.raw",
            "--truth",
            "t.jsonl",
        ],
    );
    fs::write(p.join("bad.json"), r#"{"frames": 10}"#).unwrap();
    fails(
        p,
        &[
            "synth",
            "--scenario",
            "bad.json",
            "--video",
            "v.raw",
            "--truth",
            "t.jsonl",
        ],
    );
}

#[test]
fn eval_reports_malformed_line() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    fs::write(
        p.join("gt.jsonl"),
        "{\"id\":0,\"frame\":5,\"x_left\":0,\"x_right\":10,\"plate\":\"ABC1234\"}\n",
    )
    .unwrap();
    fs::write(
        p.join("ev.jsonl"),
        "{\"frame\":5,\"x0\":0,\"x1\":10,\"source\":\"ala\"}\n{oops\n",
    )
    .unwrap();
    let e = fails(p, &["eval", "--events", "ev.jsonl", "--truth", "gt.jsonl"]);
    assert!(e.contains("line 2"), "{e}");
}

#[test]
fn eval_empty_predictions_and_failed_reading() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    let k = 4;
    let truth: Vec<GroundTruthRecord> = (0..k)
        .map(|i| GroundTruthRecord {
            id: i,
            frame: 100 * i as u64,
            x_left: 0,
            x_right: 200,
            plate: "ABC1234".into(),
        })
        .collect();
    linescan::records::save_jsonl(&p.join("gt.jsonl"), &truth).unwrap();
    fs::write(p.join("none.jsonl"), "").unwrap();
    let table = ok(
        p,
        &["eval", "--events", "none.jsonl", "--truth", "gt.jsonl"],
    );
    assert!(table.contains("precision undefined"), "{table}");

    let readings: Vec<PlateReading> = truth
        .iter()
        .map(|t| PlateReading {
            frame: t.frame,
            x0: 0,
            x1: 200,
            bbox: None,
            text: (t.id != 2).then(|| t.plate.clone()),
            reason: None,
        })
        .collect();
    linescan::records::save_jsonl(&p.join("r.jsonl"), &readings).unwrap();
    let events: String = truth
        .iter()
        .map(|t| {
            format!(
                "{{\"frame\":{},\"x0\":0,\"x1\":200,\"source\":\"vr\"}}\n",
                t.frame
            )
        })
        .collect();
    fs::write(p.join("ev.jsonl"), events).unwrap();
    ok(
        p,
        &[
            "eval",
            "--events",
            "ev.jsonl",
            "--truth",
            "gt.jsonl",
            "--readings",
            "r.jsonl",
            "--report",
            "rep.json",
        ],
    );
    let rep: serde_json::Value =
        serde_json::from_slice(&fs::read(p.join("rep.json")).unwrap()).unwrap();
    let acc = rep["ocr_accuracy"].as_f64().unwrap();
    assert!(
        (acc - (1.0 - 7.0 / (7.0 * k as f64))).abs() < 1e-12,
        "{acc}"
    );
}

#[test]
fn bench_reports_each_method() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    let out = ok(
        p,
        &[
            "bench", "--size", "640x480", "--frames", "1000", "--reps", "3", "--report", "b.json",
        ],
    );
    assert_eq!(out.lines().count(), 4, "{out}");
    let rows: serde_json::Value =
        serde_json::from_slice(&fs::read(p.join("b.json")).unwrap()).unwrap();
    let fps = |m: &str| {
        rows.as_array()
            .unwrap()
            .iter()
            .find(|r| r["method"] == m)
            .unwrap()["fps"]
            .as_f64()
            .unwrap()
    };
    assert!(fps("ala") > fps("fullframe"));
    assert!(fps("vr") > fps("fullframe"));
    fails(p, &["bench", "--input", "missing.raw"]);
}

#[cfg(unix)]
#[test]
fn plugin_from_environment() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    synth(p, "8", "v");
    // answers every request with one box spanning the whole frame and fixed text
    let script = p.join("plugin.sh");
    fs::write(
        &script,
        "#!/bin/sh\nwhile read cmd w h; do head -c $((w * h)) > /dev/null; printf '0 0 %d %d 1.0 XYZ0000\\n\\n' \"$w\" \"$h\"; done\n",
    )
    .unwrap();
    use std::os::unix::fs::PermissionsExt;
    fs::set_permissions(&script, fs::Permissions::from_mode(0o755)).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_linescan"))
        .current_dir(p)
        .env("LINESCAN_PLUGIN", &script)
        .args([
            "ala",
            "--input",
            "v.raw",
            "--lambda",
            "300",
            "--events",
            "e.jsonl",
            "--detector",
            "plugin",
            "--readings",
            "r.jsonl",
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let readings = fs::read_to_string(p.join("r.jsonl")).unwrap();
    let events = fs::read_to_string(p.join("e.jsonl")).unwrap();
    assert_eq!(readings.lines().count(), events.lines().count());
    // the frame-wide box is centered at x=320, so only events spanning it get text
    for line in readings.lines() {
        let r: PlateReading = serde_json::from_str(line).unwrap();
        let spans = r.x0 <= 320 && 320 < r.x1;
        assert_eq!(r.text.is_some(), spans, "{line}");
        if spans {
            assert_eq!(r.text.as_deref(), Some("XYZ0000"));
        }
    }
}
