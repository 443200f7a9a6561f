use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("isocube").chain(args.iter().copied());
    let code = isocube_cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().filter(|l| !l.starts_with('#')).skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("isocube-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn profile_in_three_dimensions() {
    let (code, out, _) = run(&["profile", "-d", "3", "--points", "101", "--sources", "candidate,lower_bound"]);
    assert_eq!(code, 0);
    assert!(out.contains("# provenance: lambda=grid,candidate_d3=candidate,lower_bound_dinf=lower_bound"));
    let rows = data_rows(&out);
    assert_eq!(rows.len(), 101);
    for row in &rows {
        let (c, l): (f64, f64) = (row[1].parse().unwrap(), row[2].parse().unwrap());
        assert!(c >= l);
    }
    assert_eq!(rows[50][0], "0.500000000000");
}

#[test]
fn interval_candidate_is_constant() {
    let (code, out, _) = run(&["profile", "-d", "1", "--points", "21", "--sources", "candidate"]);
    assert_eq!(code, 0);
    let rows = data_rows(&out);
    for row in &rows[1..rows.len() - 1] {
        assert_eq!(row[1].parse::<f64>().unwrap(), 1.0);
    }
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["profile", "--sources", ""]).0, 2);
    assert_eq!(run(&["verify", "everything"]).0, 2);
    assert_eq!(run(&["profile", "--format", "xml"]).0, 2);
    assert_eq!(run(&["profile", "-d", "5", "--sources", "numerical"]).0, 2);
    assert_eq!(run(&["profile", "-d", "3", "--sources", "exact"]).0, 2);
    assert_eq!(run(&["optimize", "--lambda", "0.3", "--lambdas", "0.1,0.2"]).0, 2);
    assert_eq!(run(&["oracle", "-d", "3", "--grid", "4"]).0, 2);
    assert_eq!(run(&["nonsense"]).0, 2);
    assert_eq!(run(&["--help"]).0, 0);
}

#[test]
fn identical_runs_are_byte_identical() {
    for args in [
        &["profile", "-d", "2", "--points", "33", "--sources", "exact,candidate,lower_bound"][..],
        &[
            "optimize", "-d", "2", "--lambda", "0.3", "--grid", "32", "--init", "random", "--seed", "4", "--format",
            "json",
        ],
    ] {
        let (a, b) = (run(args), run(args));
        assert_eq!(a.0, 0, "{}", a.2);
        assert_eq!(a.1, b.1);
    }
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = scratch("config");
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, "# profile settings\ndimension = 3\npoints = 11\nsources = candidate\n").unwrap();
    let (code, out, _) = run(&["profile", "--config", cfg.to_str().unwrap(), "--points", "5"]);
    assert_eq!(code, 0);
    assert!(out.contains("\"dimension\":3"));
    assert!(out.contains("\"points\":5"));
    assert_eq!(data_rows(&out).len(), 5);

    std::fs::write(&cfg, "dimension = 2\ncolour = blue\n").unwrap();
    let (code, _, err) = run(&["profile", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("colour"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn json_mirrors_csv() {
    let (_, out, _) = run(&["profile", "-d", "2", "--lambdas", "0.25,0.5", "--sources", "exact", "--format", "json"]);
    let doc: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["command"], "profile");
    assert_eq!(doc["provenance"]["exact_d2"], "exact");
    assert_eq!(doc["rows"][1]["exact_d2"], 1.0);
    assert_eq!(doc["config"]["lambdas"][0], 0.25);
}

#[test]
fn figure_checks_pass() {
    let (code, out, _) = run(&["figure1", "--format", "json"]);
    assert_eq!(code, 0);
    let doc: Value = serde_json::from_str(&out).unwrap();
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 1001);
    let half = &rows[500];
    assert_eq!(half["lambda"], 0.5);
    for key in ["exact_d1", "exact_d2", "candidate_d3", "lower_bound_dinf"] {
        assert_eq!(half[key], 1.0, "{key}");
    }
    for row in rows {
        let v = |k: &str| row[k].as_f64().unwrap();
        assert!(v("candidate_d3") <= v("exact_d2") + 1e-12 && v("exact_d2") <= v("exact_d1") + 1e-12);
    }
    assert!(doc["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));
}

#[test]
fn lemma_and_oracle_suites_pass() {
    for suite in ["lemmas", "oracle"] {
        let (code, out, err) = run(&["verify", suite, "--format", "json"]);
        assert_eq!(code, 0, "{err}");
        let doc: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(doc["failures"], Value::Array(vec![]));
        if suite == "oracle" {
            assert!(doc["rows"]
                .as_array()
                .unwrap()
                .iter()
                .any(|r| r["family"] == "golden_d2_n4" && r["failures"] == 0));
        }
    }
}

#[test]
fn oracle_reports_corner_optima() {
    let (code, out, _) = run(&["oracle", "-d", "2", "--grid", "4", "-k", "1", "--golden", "--format", "json"]);
    assert_eq!(code, 0);
    let doc: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["rows"][0]["min_perimeter"], 0.5);
    assert_eq!(doc["rows"][0]["optima"], 4);
    assert_eq!(doc["optima"].as_array().unwrap().len(), 4);

    let (code, out, _) = run(&["oracle"]);
    assert_eq!(code, 0);
    assert_eq!(data_rows(&out).len(), 8);
}

#[test]
fn optimize_dump_and_failed_check() {
    let dir = scratch("dump");
    let dump = dir.join("field.txt");
    let (code, out, err) = run(&[
        "optimize",
        "-d",
        "2",
        "--lambda",
        "0.5",
        "--grid",
        "32",
        "--dump",
        dump.to_str().unwrap(),
        "--dump-format",
        "text",
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("# diagnostics:"));
    let text = std::fs::read_to_string(&dump).unwrap();
    assert!(text.starts_with("isocube-field 2 32 "));
    assert_eq!(text.lines().count(), 1 + 1024);

    let (code, out, _) = run(&["optimize", "-d", "2", "--lambdas", "0.2,0.5", "--grid", "24"]);
    assert_eq!(code, 0);
    assert_eq!(data_rows(&out).len(), 2);

    // A diffusion length close to the box size smears the interface over
    // the whole grid; the estimate falls below the Gaussian bound.
    let (code, _, err) = run(&["optimize", "-d", "2", "--lambda", "0.1", "--grid", "16", "--sigma", "12"]);
    assert_eq!(code, 1);
    assert!(err.contains("above_lower_bound"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn binary_reports_exit_codes_and_writes_out_file() {
    let exe = env!("CARGO_BIN_EXE_isocube");
    let dir = scratch("bin");
    let target = dir.join("figure.csv");
    let status = Command::new(exe).args(["figure1", "--out", target.to_str().unwrap()]).status().unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(std::fs::read_to_string(&target).unwrap().contains("candidate_d3"));
    let status = Command::new(exe).args(["verify", "nope"]).output().unwrap().status;
    assert_eq!(status.code(), Some(2));
    std::fs::remove_dir_all(&dir).unwrap();
}
