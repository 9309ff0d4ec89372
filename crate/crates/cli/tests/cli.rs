use std::path::Path;
use std::process::{Command, Output};

const GOLDEN_STAR5: &str = include_str!("golden/star5.txt");
const GOLDEN_SBEP: &str = include_str!("golden/sbep_2_20.csv");

fn keynet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_keynet")).args(args).env_remove("KEYNET_FORMAT").output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = keynet(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    keynet(args).status.code().expect("exited normally")
}

#[test]
fn formula_single_and_range() {
    assert_eq!(stdout(&["formula", "--n", "5"]), "6\n");
    assert_eq!(stdout(&["formula", "--range", "2..4", "--format", "csv"]), "n,sbep\n2,1\n3,3\n4,3\n");
    assert_eq!(stdout(&["formula", "--range", "2..20", "--format", "csv"]), GOLDEN_SBEP);
}

#[test]
fn schedule_matches_golden_star5() {
    assert_eq!(stdout(&["schedule", "--topology", "star", "--n", "5"]), GOLDEN_STAR5);
    assert_eq!(stdout(&["schedule", "--topology", "fcn-full", "--n", "3"]).lines().count(), 1);
    assert_eq!(stdout(&["schedule", "--topology", "fcn1", "--n", "5"]).lines().count(), 5);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&["formula", "--n", "1"]), 2);
    assert_eq!(code(&["formula", "--range", "5..3"]), 2);
    assert_eq!(code(&["formula"]), 2);
    assert_eq!(code(&["schedule", "--topology", "ring", "--n", "5"]), 2);
    assert_eq!(code(&["schedule", "--topology", "star", "--n", "5", "--format", "svg"]), 2);
    assert_eq!(code(&["simulate", "--topology", "star", "--n", "5", "--fail", "center"]), 2);
    assert_eq!(code(&["simulate", "--topology", "star", "--n", "5", "--k", "0"]), 2);
    assert_eq!(code(&["validate", "--in", "/nonexistent/schedule.txt", "--topology", "star"]), 2);
}

#[test]
fn domain_errors_exit_three() {
    assert_eq!(code(&["oracle", "--topology", "star", "--n", "9"]), 3);
    assert_eq!(code(&["simulate", "--topology", "lch", "--n", "4", "--fail", "center@1"]), 3);
    assert_eq!(code(&["simulate", "--topology", "star", "--n", "4", "--fail", "ke:9@1"]), 3);
}

#[test]
fn format_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_keynet"))
        .args(["formula", "--range", "2..4"])
        .env("KEYNET_FORMAT", "csv")
        .output()
        .unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "n,sbep\n2,1\n3,3\n4,3\n");
}

#[test]
fn regress_constants_and_plot() {
    let text = stdout(&["regress", "--n-max", "20"]);
    assert!(text.contains("slope: 1.319298246\n"), "{text}");
    assert!(text.contains("intercept: -1.301754386\n"));
    assert!(text.contains("r_squared: 0.9889891570\n"));

    let json: serde_json::Value = serde_json::from_str(&stdout(&["regress", "--format", "json"])).unwrap();
    assert!((json["slope"].as_f64().unwrap() - 1.3192982456).abs() < 1e-9);

    let dir = tempfile::tempdir().unwrap();
    let plot = dir.path().join("fit.svg");
    stdout(&["regress", "--plot", plot.to_str().unwrap()]);
    let svg = std::fs::read_to_string(&plot).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains(r#"viewBox="0 0 800 600""#));
    assert_eq!(svg.matches("<circle").count(), 19);
    assert_eq!(svg, stdout(&["regress", "--format", "svg"]));
}

#[test]
fn compare_star_row() {
    let csv = stdout(&["compare", "--n", "10", "--format", "csv"]);
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    let steps = header.iter().position(|&h| h == "steps").unwrap();
    let star = csv.lines().find(|l| l.starts_with("STAR,")).unwrap();
    assert_eq!(star.split(',').nth(steps), Some("12"));
}

#[test]
fn simulate_truncated_replay() {
    let json: serde_json::Value = serde_json::from_str(&stdout(&[
        "simulate",
        "--topology",
        "star",
        "--n",
        "5",
        "--k",
        "1",
        "--fail",
        "center@4",
        "--format",
        "json",
    ]))
    .unwrap();
    assert_eq!(json["lost_pairs"].as_array().unwrap().len(), 5);
    let csv = stdout(&["simulate", "--topology", "star", "--n", "5", "--k", "3", "--format", "csv"]);
    assert_eq!(csv.lines().count(), 11);
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",3")));
}

#[test]
fn oracle_reports_minimum() {
    let text = stdout(&["oracle", "--topology", "star", "--n", "6"]);
    assert!(text.starts_with("min_steps: 5\n"), "{text}");
    let json: serde_json::Value =
        serde_json::from_str(&stdout(&["oracle", "--topology", "lch", "--n", "4", "--format", "json"])).unwrap();
    assert!(json["min_steps"].as_u64().unwrap() >= 3);
}

fn write(dir: &Path, name: &str, contents: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn validate_text_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "t1.txt", GOLDEN_STAR5);
    assert!(stdout(&["validate", "--in", &good, "--topology", "star"]).contains("valid"));

    let bad = write(dir.path(), "bad.txt", "step 1: (1,2) (2,3)\n");
    let out = keynet(&["validate", "--in", &bad, "--topology", "star", "--n", "3"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stdout).contains("INVALID"));

    assert_eq!(code(&["validate", "--in", &good]), 2);

    let json = stdout(&["schedule", "--topology", "lch", "--n", "6", "--format", "json"]);
    let path = write(dir.path(), "lch.json", &json);
    let report: serde_json::Value =
        serde_json::from_str(&stdout(&["validate", "--in", &path, "--format", "json"])).unwrap();
    assert_eq!(report["ok"], true);

    let garbled = write(dir.path(), "garbled.txt", "step 1: (1,2\n");
    assert_eq!(code(&["validate", "--in", &garbled, "--topology", "star"]), 3);
}

#[test]
fn schedule_out_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("star5.txt");
    assert_eq!(stdout(&["schedule", "--topology", "star", "--n", "5", "--out", path.to_str().unwrap()]), "");
    assert_eq!(std::fs::read_to_string(&path).unwrap(), GOLDEN_STAR5);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1, "no temporary files left behind");
}

#[test]
fn json_outputs_are_single_documents() {
    let cmds: [&[&str]; 6] = [
        &["formula", "--range", "2..9", "--format", "json"],
        &["schedule", "--topology", "star", "--n", "7", "--format", "json"],
        &["compare", "--n", "6", "--format", "json"],
        &["oracle", "--topology", "fcn1", "--n", "5", "--format", "json"],
        &["simulate", "--topology", "lch", "--n", "5", "--k", "2", "--fail", "cable:2@3", "--format", "json"],
        &["regress", "--format", "json"],
    ];
    for args in cmds {
        let out = stdout(args);
        serde_json::from_str::<serde_json::Value>(&out).unwrap_or_else(|e| panic!("{args:?}: {e}"));
    }
}

#[test]
fn repeated_invocations_are_identical() {
    let cmds: [&[&str]; 5] = [
        &["schedule", "--topology", "star", "--n", "13"],
        &["schedule", "--topology", "lch", "--n", "9", "--format", "csv"],
        &["compare", "--n", "8"],
        &["simulate", "--topology", "fcn1", "--n", "6", "--k", "2", "--fail", "ke:3@2"],
        &["regress", "--format", "svg"],
    ];
    for args in cmds {
        let first = stdout(args);
        for _ in 0..2 {
            assert_eq!(stdout(args), first, "{args:?}");
        }
    }
}
