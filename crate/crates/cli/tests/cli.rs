use std::path::PathBuf;
use std::process::Command;

use proptest::prelude::*;
use serde_json::Value;
use wtgf::channels::{make_erasure_wtgf, ErasureParams};
use wtgf::optimize::{maximize, Objective, SearchConfig};
use wtgf_cli::report::round_sig;
use wtgf_cli::spec::{parse_spec, ChannelSpecFile};
use wtgf_cli::{load_channel, parse_channel_spec, run_args, Channel};

const GOOD: [&str; 5] = [
    "bsc_pair.json",
    "erasure.json",
    "parallel_p3.json",
    "perfect_feedback.json",
    "state.json",
];

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn fixture_str(name: &str) -> String {
    fixture(name).display().to_string()
}

fn wtgf(args: &[&str]) -> (i32, Value, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_wtgf")).args(args).output().unwrap();
    let stdout = String::from_utf8(out.stdout).unwrap();
    let report = if stdout.is_empty() { Value::Null } else { serde_json::from_str(&stdout).unwrap() };
    (out.status.code().unwrap(), report, String::from_utf8(out.stderr).unwrap())
}

fn in_process(args: &[&str]) -> (i32, Value) {
    let out = run_args(std::iter::once("wtgf").chain(args.iter().copied()));
    assert!(out.code != 0 || out.stderr.is_empty(), "{}", out.stderr);
    let report = if out.stdout.is_empty() { Value::Null } else { serde_json::from_str(&out.stdout).unwrap() };
    (out.code, report)
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("wtgf-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn erasure_command_emits_closed_forms() {
    let (code, r, _) = wtgf(&["erasure", "--delta", "0.5", "--delta-e", "0.5"]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["inner_kg"], 0.166666667);
    assert_eq!(r["result"]["capacity"], 0.214285714);
    assert!((r["result"]["inner_kg"].as_f64().unwrap() - 1.0 / 6.0).abs() < 1e-9);
    assert!((r["result"]["capacity"].as_f64().unwrap() - 3.0 / 14.0).abs() < 1e-9);
}

#[test]
fn out_of_range_erasure_is_a_validation_error() {
    let (code, r, err) = wtgf(&["erasure", "--delta", "1.5", "--delta-e", "0.5"]);
    assert_eq!(code, 2);
    assert_eq!(r, Value::Null);
    assert!(err.contains("validation"), "{err}");
}

#[test]
fn classify_reports_degradedness() {
    let (code, r, _) = wtgf(&["classify", "--channel", &fixture_str("bsc_pair.json")]);
    assert_eq!(code, 0);
    let main = &r["result"]["main"];
    assert_eq!(main["degraded_y_to_z"], true);
    assert_eq!(main["degraded_z_to_y"], false);
    assert_eq!(main["bob_less_noisy"]["verdict"], "yes");
    assert_eq!(main["eve_less_noisy"]["verdict"], "no");
    assert_eq!(r["channel"]["name"], "bsc-pair");
}

#[test]
fn classify_lists_every_hypothesis_of_a_parallel_channel() {
    let (code, r) = in_process(&["classify", "--channel", &fixture_str("parallel_p3.json"), "--probes", "64"]);
    assert_eq!(code, 0);
    let h = &r["result"]["hypotheses"];
    assert_eq!(h["P3"]["status"], "verified");
    assert_eq!(h["P2"]["status"], "refuted");
    assert_eq!(r["result"]["same_side_information"], true);
}

#[test]
fn bad_row_is_rejected_with_its_index() {
    let (code, r, err) = wtgf(&["classify", "--channel", &fixture_str("bad_row.json")]);
    assert_eq!(code, 2);
    assert_eq!(r, Value::Null);
    assert!(err.contains("row 1 sums to 0.89999"), "{err}");
}

#[test]
fn malformed_json_reports_its_line() {
    let path = tmp("malformed.json");
    std::fs::write(&path, "{\n  \"version\": 1,\n  \"kind\": \"erasure\",\n  \"delta\": 0.5,,\n}\n").unwrap();
    let (code, _, err) = wtgf(&["classify", "--channel", path.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("line 4"), "{err}");
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(wtgf(&["no-such-command"]).0, 2);
    assert_eq!(wtgf(&["special-case", "--case", "P9", "--channel", "x.json"]).0, 2);
    assert_eq!(wtgf(&["inner-kg"]).0, 2);
    assert_eq!(wtgf(&["inner-kg", "--channel", &fixture_str("bsc_pair.json"), "--caps", "w=2"]).0, 2);
    assert_eq!(wtgf(&["thm6", "--channel", &fixture_str("bsc_pair.json")]).0, 2);
    let help = run_args(["wtgf", "--help"]);
    assert_eq!(help.code, 0);
    assert!(help.stdout.contains("inner-kg"));
}

#[test]
fn refused_and_infeasible_computations_exit_with_three() {
    let p3 = fixture_str("parallel_p3.json");
    let (code, _, err) = wtgf(&["special-case", "--case", "P2", "--channel", &p3, "--probes", "64"]);
    assert_eq!(code, 3);
    assert!(err.contains("P2"), "{err}");
    let (code, _, err) = wtgf(&["outer", "--bound", "sk", "--channel", &p3, "--mode", "grid", "--grid", "4"]);
    assert_eq!(code, 3);
    assert!(err.contains("budget"), "{err}");
    let (code, r, _) = wtgf(&["special-case", "--case", "P2", "--assume-hypothesis", "--channel", &p3, "--restarts", "2"]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["hypothesis"]["status"], "overridden");
}

#[test]
fn erasure_spec_matches_the_constructor() {
    let (_, ch) = load_channel(&fixture("erasure.json"), 1e-9).unwrap();
    assert_eq!(ch, Channel::Wtgf(make_erasure_wtgf(ErasureParams::new(0.5, 0.5).unwrap())));
}

#[test]
fn minimal_spec_has_a_degenerate_feedback_alphabet() {
    let text = r#"{"version": 1, "kind": "wtgf",
        "alphabets": {"x": ["a", "b"], "y": ["0", "1"], "yhat": ["-"], "z": ["0"]},
        "kernel": {"dims": [2, 2, 1, 1], "data": [1, 0, 0.25, 0.75]}}"#;
    let Channel::Wtgf(ch) = parse_channel_spec(text, 1e-9).unwrap() else {
        panic!("expected a WTC-GF")
    };
    assert!(ch.yhat().is_degenerate());
    assert_eq!(ch.kernel().rows(), &[1.0, 0.0, 0.25, 0.75]);
}

#[test]
fn tolerance_flag_admits_small_deviations_and_renormalizes() {
    let text = std::fs::read_to_string(fixture("bsc_pair.json")).unwrap().replace("0.02, 0.08, 0.18, 0.72", "0.02, 0.08, 0.18, 0.72001");
    assert!(parse_channel_spec(&text, 1e-9).is_err());
    let Channel::Wtgf(ch) = parse_channel_spec(&text, 1e-4).unwrap() else {
        panic!("expected a WTC-GF")
    };
    let row: f64 = ch.kernel().rows()[4..].iter().sum();
    assert!((row - 1.0).abs() < 1e-15);

    let path = tmp("loose.json");
    std::fs::write(&path, &text).unwrap();
    assert_eq!(wtgf(&["classify", "--channel", path.to_str().unwrap()]).0, 2);
    let (code, r, _) = wtgf(&["classify", "--channel", path.to_str().unwrap(), "--tolerance", "1e-4"]);
    assert_eq!(code, 0);
    assert_eq!(r["config"]["tolerance"], 1e-4);
}

#[test]
fn specs_round_trip() {
    for name in GOOD {
        let text = std::fs::read_to_string(fixture(name)).unwrap();
        let original = parse_spec(&text).unwrap();
        let again = parse_spec(&serde_json::to_string_pretty(&original).unwrap()).unwrap();
        assert_eq!(original, again, "{name}");

        let ch = original.build(1e-9).unwrap();
        let general = ChannelSpecFile::from_channel(&ch);
        let rebuilt = parse_spec(&serde_json::to_string(&general).unwrap()).unwrap().build(1e-9).unwrap();
        assert_eq!(ch, rebuilt, "{name}");
    }
}

#[test]
fn general_specs_keep_their_tensors() {
    for name in ["parallel_p3.json", "state.json"] {
        let original = parse_spec(&std::fs::read_to_string(fixture(name)).unwrap()).unwrap();
        let general = ChannelSpecFile::from_channel(&original.build(1e-9).unwrap());
        assert_eq!(general.body, original.body, "{name}");
    }
}

#[test]
fn inner_kg_is_byte_reproducible() {
    let args = [
        "inner-kg",
        "--channel",
        &fixture_str("bsc_pair.json"),
        "--seed",
        "7",
        "--restarts",
        "64",
        "--caps",
        "q=1,u=2,v=1,t=1",
    ];
    let (c1, a) = in_process(&args);
    let (c2, b) = in_process(&args);
    assert_eq!((c1, c2), (0, 0));
    for key in ["config", "channel", "result"] {
        assert_eq!(a[key].to_string(), b[key].to_string(), "{key}");
    }
    assert!((a["result"]["best_bits"].as_f64().unwrap() - 0.252932501).abs() < 1e-9);
}

#[test]
fn out_flag_writes_the_report() {
    let path = tmp("report.json");
    let out = run_args(["wtgf", "erasure", "--delta", "0.25", "--delta-e", "0.5", "--out", path.to_str().unwrap()]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(r["command"], "erasure");
}

/// Re-run the library with the echoed configuration.
fn rederive(report: &Value) -> f64 {
    let path = PathBuf::from(report["channel"]["path"].as_str().unwrap());
    let tolerance = report["config"]["tolerance"].as_f64().unwrap();
    let cfg: SearchConfig = serde_json::from_value(report["config"]["search"].clone()).unwrap();
    let objective: Objective = serde_json::from_value(report["config"]["objective"].clone()).unwrap();
    let (_, ch) = load_channel(&path, tolerance).unwrap();
    maximize(objective, ch.as_ref(), &cfg).unwrap().best_bits.unwrap()
}

#[test]
fn reported_rates_are_rederivable_from_the_echo() {
    let p3 = fixture_str("parallel_p3.json");
    let pf = fixture_str("perfect_feedback.json");
    let st = fixture_str("state.json");
    let runs: Vec<Vec<&str>> = vec![
        vec!["inner-kg", "--channel", &pf, "--restarts", "3", "--seed", "5", "--caps", "q=1,u=2,v=2,t=1"],
        vec!["sk-inner", "--channel", &p3, "--restarts", "2", "--caps", "q=1,u=2,v=2,t=1"],
        vec!["outer", "--channel", &p3, "--restarts", "2"],
        vec!["outer", "--bound", "sk", "--channel", &p3, "--mode", "grid", "--grid", "2"],
        vec!["special-case", "--case", "P3", "--channel", &p3, "--restarts", "2"],
        vec!["thm5", "--channel", &pf, "--u-is-x", "--mode", "grid", "--grid", "16"],
        vec!["thm6", "--channel", &st, "--restarts", "2", "--tolerance", "1e-6"],
    ];
    for args in runs {
        let (code, r) = in_process(&args);
        assert_eq!(code, 0, "{args:?}");
        let reported = r["result"]["best_bits"].as_f64().unwrap();
        let again = rederive(&r);
        assert!((reported - round_sig(again)).abs() <= 1e-12, "{args:?}: {reported} vs {again}");
        assert!((reported - again).abs() <= 5e-9 * again.abs().max(1e-300), "{args:?}");
    }
}

#[test]
fn leakage_fixture_is_exact() {
    let (code, r) = in_process(&["leakage", "--fixture", "tiny-leakage"]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["leakage"]["message_bits"], 0.0);
    assert_eq!(r["result"]["leakage"]["method"], "enumeration");
    let (code, r) = in_process(&["leakage", "--fixture", "tiny-leakage", "--eve-flip", "0.2", "--key"]);
    assert_eq!(code, 0);
    assert!(r["result"]["leakage"]["message_bits"].as_f64().unwrap() > 0.0);
    assert!(r["result"]["leakage"]["key_bits"].is_number());
}

#[test]
fn simulate_runs_the_noiseless_fixture() {
    let (code, r) = in_process(&["simulate", "--fixture", "noiseless-session", "--sessions", "10", "--trace"]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["sizes"]["keys"], 4);
    assert_eq!(r["result"]["error"]["trials"], 10);
    assert_eq!(r["result"]["trace"]["blocks"].as_array().unwrap().len(), 4);
}

#[test]
fn simulate_accepts_factors_from_a_report() {
    let pf = fixture_str("perfect_feedback.json");
    let (_, r) = in_process(&["inner-kg", "--channel", &pf, "--restarts", "2", "--caps", "q=1,u=2,v=2,t=1"]);
    let path = tmp("factors.json");
    std::fs::write(&path, r["result"]["best_factors"].to_string()).unwrap();
    let (code, s) = in_process(&["simulate", "--channel", &pf, "--factors", path.to_str().unwrap(), "--sessions", "5"]);
    assert_eq!(code, 0);
    assert_eq!(s["config"]["rates"]["n"], 12);
    assert_eq!(s["result"]["error"]["trials"], 5);
}

#[test]
fn every_number_has_at_most_nine_significant_digits() {
    fn walk(v: &Value) {
        match v {
            Value::Number(n) => {
                if let Some(x) = n.as_f64().filter(|_| n.is_f64()) {
                    assert_eq!(round_sig(x), x);
                }
            }
            Value::Array(a) => a.iter().for_each(walk),
            Value::Object(m) => m.values().for_each(walk),
            _ => {}
        }
    }
    let (_, r) = in_process(&["thm6", "--channel", &fixture_str("state.json"), "--restarts", "2"]);
    walk(&r);
}

proptest! {
    #[test]
    fn rounding_is_idempotent_and_close(x in -1e6f64..1e6) {
        let r = round_sig(x);
        prop_assert_eq!(round_sig(r), r);
        prop_assert!((r - x).abs() <= 5e-9 * x.abs());
    }
}
