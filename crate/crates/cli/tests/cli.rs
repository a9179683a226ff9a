use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shatterlab"))
        .args(args)
        .env_remove("SHATTERLAB_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

#[test]
fn vc_of_intervals_is_two_with_certificate() {
    let input = data("intervals.json");
    let o = run(&["vc", "--input", input.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("vc           2"), "{text}");
    assert!(text.contains("{1, 2}"), "{text}");

    let o = run(&["vc", "-i", input.to_str().unwrap(), "--format", "json"]);
    let v = json(&o);
    assert_eq!(v["command"], "vc");
    assert_eq!(v["result"]["vc"], 2);
    assert_eq!(v["result"]["certificate"], serde_json::json!(["1", "2"]));
}

#[test]
fn pac_rect_auto_uses_148_samples() {
    let o = run(&["pac-rect", "--eps", "0.1", "--delta", "0.1", "--m", "auto", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&o);
    let report = &v["result"]["report"];
    assert_eq!(report["m_used"], 148);
    assert!(report["empirical_failure_rate"].as_f64().unwrap() <= 0.1);
    assert_eq!(v["result"]["rows"].as_array().unwrap().len(), 1000);
}

#[test]
fn verify_chain_holds() {
    let input = data("classes.json");
    let o = run(&["verify", "chain", "--input", input.to_str().unwrap(), "--connective", "mul", "--eps", "0.5"]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("violations  0"));
}

#[test]
fn verify_exits_three_only_on_violations() {
    let base = ["verify", "modulus", "--connective", "mul", "--samples", "5000"];
    assert_eq!(run(&base).status.code(), Some(0));
    let mut bad = base.to_vec();
    bad.extend(["--linear-modulus", "2", "--format", "json"]);
    let o = run(&bad);
    assert_eq!(o.status.code(), Some(3));
    assert!(json(&o)["violations"].as_u64().unwrap() >= 1);

    let o = run(&["verify", "image", "--connective", "mul", "--eps", "0.2", "--linear-modulus", "4"]);
    assert_eq!(o.status.code(), Some(3), "{}", stdout(&o));
    let o = run(&["verify", "image", "--connective", "mul", "--eps", "0.2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn exit_codes_for_errors() {
    let concepts = data("concepts.json");
    let o = run(&["compose-c", "-i", concepts.to_str().unwrap(), "--connective", "and", "--class-cap", "3"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("capacity"));

    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{\n  \"points\": [\"a\",\n}").unwrap();
    let o = run(&["vc", "-i", broken.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    let bad_field = dir.path().join("bad.json");
    std::fs::write(&bad_field, r#"{"points":["a","b"],"concepts":["10","1"]}"#).unwrap();
    let o = run(&["vc", "-i", bad_field.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("concepts[1]"), "{}", stderr(&o));

    assert_eq!(run(&["fat", "-i", "x.json", "--eps", "0"]).status.code(), Some(1));
    assert_eq!(run(&["vc", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(run(&["sauer", "--d", "0", "--n", "3"]).status.code(), Some(1));
    let intervals = data("intervals.json");
    let o = run(&["bound-mv", "-i", intervals.to_str().unwrap(), "--eps", "0.3", "--const-c=-1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("constant c"), "{}", stderr(&o));
}

#[test]
fn json_is_byte_identical_across_thread_counts() {
    for args in [
        vec!["verify", "modulus", "--connective", "mul", "--samples", "20000"],
        vec!["verify", "sauer", "--trials", "40"],
        vec!["pac-rect", "--trials", "200", "--m", "30"],
    ] {
        let mut one = args.clone();
        one.extend(["--format", "json", "--threads", "1"]);
        let mut many = args.clone();
        many.extend(["--format", "json", "--threads", "4"]);
        let a = run(&one);
        let b = run(&many);
        assert!(a.status.success() && b.status.success());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert_eq!(a.stdout, run(&one).stdout);
    }
    let default_seed = run(&["verify", "modulus", "--connective", "mul", "--samples", "2000", "--format", "json"]);
    let other = run(&["verify", "modulus", "--connective", "mul", "--samples", "2000", "--format", "json", "--seed", "7"]);
    assert_ne!(default_seed.stdout, other.stdout);
}

#[test]
fn threads_fall_back_to_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_shatterlab"))
        .args(["alpha", "--k", "2"])
        .env("SHATTERLAB_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--threads"));
}

#[test]
fn csv_to_file_has_schema_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("growth.csv");
    let input = data("intervals.json");
    let o = run(&["growth", "-i", input.to_str().unwrap(), "--format", "csv", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("#schema=1"));
    assert_eq!(lines.next(), Some("n,growth,sauer_bound"));
    assert_eq!(lines.nth(10), Some("10,56,184.72640247326623"));
}

#[test]
fn pac_rect_reads_experiment_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.json");
    std::fs::write(
        &cfg,
        r#"{"target": {"kind": "box", "x_min": 0.2, "x_max": 0.6, "y_min": 0.1, "y_max": 0.9},
            "distribution": {"kind": "segment-mixture",
                             "x": [{"lo": 0.0, "hi": 0.5, "weight": 0.75}, {"lo": 0.5, "hi": 1.0, "weight": 0.25}],
                             "y": [{"lo": 0.0, "hi": 1.0, "weight": 1}]},
            "eps": 0.2, "delta": 0.05, "trials": 300, "seed": 9}"#,
    )
    .unwrap();
    let o = run(&["pac-rect", "--config", cfg.to_str().unwrap(), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["result"]["report"]["seed"], 9);
    assert!(v["result"]["report"]["empirical_failure_rate"].as_f64().unwrap() <= 0.05);

    std::fs::write(&cfg, r#"{"target": {"kind": "empty"}, "eps": 0.2, "delta": 0.1, "trials": 1, "colour": 1}"#).unwrap();
    let o = run(&["pac-rect", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("colour"));
}

#[test]
fn composition_and_bounds() {
    let concepts = data("concepts.json");
    let o = run(&["compose-c", "-i", concepts.to_str().unwrap(), "--connective", "implies", "--format", "json"]);
    let v = json(&o);
    assert_eq!(v["result"]["table"], serde_json::json!([true, true, false, true]));
    assert!(v["result"]["vc"].as_u64().unwrap() < v["result"]["bound"].as_u64().unwrap());

    let o = run(&["alpha", "--k", "2,3", "--format", "csv"]);
    assert_eq!(stdout(&o), "#schema=1\nk,alpha\n2,6\n3,10\n");

    let classes = data("classes.json");
    let o = run(&["bound-main", "-i", classes.to_str().unwrap(), "--connective", "mul", "--eps", "0.5", "--format", "json"]);
    let r = &json(&o)["result"]["report"];
    assert_eq!(r["holds"], true);
    assert_eq!(r["multiplier"], 7.5);

    let o = run(&["counterexample", "--format", "json"]);
    let r = &json(&o)["result"];
    assert_eq!(r["check"]["holds"], true);
    assert_eq!(r["identified"], 24);
}
