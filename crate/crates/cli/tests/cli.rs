use std::fs;
use std::process::{Command, Output};

fn weakcover(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weakcover")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Data rows as column-name -> value maps.
fn parse_rows(text: &str) -> Vec<std::collections::HashMap<String, String>> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    lines
        .map(|l| header.iter().map(|h| h.to_string()).zip(l.split(',').map(String::from)).collect())
        .collect()
}

#[test]
fn zero_radius_gives_a_single_zero_row() {
    let out = weakcover(&["coverage", "--dim", "4", "--n", "10", "--r-grid", "0", "--seed", "1"]);
    assert!(out.status.success());
    let rows = parse_rows(&stdout(&out));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["estimate"], "0");
    assert_eq!(rows[0]["quantity"], "coverage");
}

#[test]
fn header_names_command_and_seed() {
    let out = weakcover(&["radius", "--dim", "3", "--n", "50", "--targets", "300", "--seed", "17"]);
    let text = stdout(&out);
    let first = text.lines().next().unwrap();
    assert!(first.starts_with("# weakcover ") && first.contains("command=radius") && first.ends_with("seed=17"));
    let rows = parse_rows(&text);
    let r: f64 = rows[0]["estimate"].parse().unwrap();
    assert!(r > 0.0 && r < 3f64.sqrt());
}

#[test]
fn invalid_arguments_exit_with_usage_code() {
    for args in [
        &["coverage", "--dim", "0", "--n", "5", "--r", "0.1", "--seed", "1"][..],
        &["coverage", "--dim", "3", "--n", "5", "--r", "0.1"][..],
        &["coverage", "--dim", "3", "--n", "5", "--r", "0.1", "--delta", "1.5", "--seed", "1"][..],
        &["coverage", "--dim", "3", "--n", "5", "--r", "0.1", "--scheme", "halton", "--seed", "1"][..],
        &["delta-sweep", "--dim", "3", "--n", "5", "--r", "0.1", "--delta-grid", "0.5,0.2", "--seed", "1"][..],
        &["design", "--dim", "60", "--n", "4", "--scheme", "sobol", "--seed", "1"][..],
    ] {
        let out = weakcover(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn infeasible_request_exits_with_code_3() {
    let out = weakcover(&["design", "--dim", "3", "--n", "10", "--scheme", "vertex", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(out.stdout.is_empty());
}

#[test]
fn offending_flag_is_named() {
    let out = weakcover(&["coverage", "--dim", "3", "--n", "5", "--r-grid", "0.1,x", "--seed", "1"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("--r-grid"));
}

#[test]
fn infeasible_cells_print_na() {
    // With a single point covering the level at small δ, the δ-optimised size is degenerate.
    let out = weakcover(&[
        "ngamma", "--dim", "50", "--r-grid", "2.3", "--delta-grid", "0.1:1:0.1", "--targets", "500", "--seed", "3",
    ]);
    assert!(out.status.success());
    let rows = parse_rows(&stdout(&out));
    let opt = rows.iter().find(|r| r["quantity"] == "n_gamma_opt").unwrap();
    assert_eq!(opt["estimate"], "NA");
    assert!(opt["method"].contains("degenerate"));
    let unit = rows.iter().find(|r| r["quantity"] == "n_gamma_unit").unwrap();
    assert!(unit["estimate"].parse::<u64>().unwrap() > 1);

    let out = weakcover(&["ngamma", "--dim", "10", "--r-grid", "0.05", "--n-cap", "64", "--targets", "50", "--seed", "3"]);
    let rows = parse_rows(&stdout(&out));
    let unit = rows.iter().find(|r| r["quantity"] == "n_gamma_unit").unwrap();
    assert_eq!(unit["estimate"], "NA");
    assert!(unit["method"].contains("unreachable"));
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "dim = 3\nn = 40\nr_grid = \"0.2,0.4\"\nseed = 5\ntargets = 200\nasymptotic = true\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let from_file = weakcover(&["coverage", "--config", cfg]);
    assert!(from_file.status.success(), "{}", String::from_utf8_lossy(&from_file.stderr));
    let explicit = weakcover(&[
        "coverage", "--dim", "3", "--n", "40", "--r-grid", "0.2,0.4", "--seed", "5", "--targets", "200", "--asymptotic",
    ]);
    assert_eq!(from_file.stdout, explicit.stdout);
    let overridden = weakcover(&["coverage", "--config", cfg, "--n", "80"]);
    assert!(parse_rows(&stdout(&overridden)).iter().all(|r| r["n"] == "80"));
}

#[test]
fn jsonl_matches_csv_values() {
    let base = ["intersect", "--dim", "10", "--r-grid", "0.9,1.1", "--inner", "20000", "--seed", "8"];
    let csv = parse_rows(&stdout(&weakcover(&base)));
    let mut args = base.to_vec();
    args.extend(["--format", "jsonl"]);
    let text = stdout(&weakcover(&args));
    let mut lines = text.lines();
    let meta: serde_json::Value = serde_json::from_str(lines.next().unwrap()).unwrap();
    assert_eq!(meta["seed"], 8);
    let json: Vec<serde_json::Value> = lines.map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(json.len(), csv.len());
    for (j, c) in json.iter().zip(&csv) {
        assert_eq!(j["quantity"], c["quantity"].as_str());
        assert_eq!(j["estimate"].as_f64().unwrap(), c["estimate"].parse::<f64>().unwrap());
    }
}

#[test]
fn timing_is_opt_in() {
    let args = ["design", "--dim", "2", "--n", "4", "--seed", "1"];
    let plain = stdout(&weakcover(&args));
    assert!(!plain.contains("wall_time_s"));
    let out = weakcover(&["delta-sweep", "--dim", "4", "--n", "20", "--r", "0.4", "--targets", "100", "--seed", "1", "--timing"]);
    assert!(stdout(&out).lines().nth(1).unwrap().ends_with(",wall_time_s"));
}

#[test]
fn design_dump_matches_coverage_design() {
    let out = weakcover(&["design", "--dim", "3", "--n", "8", "--scheme", "sobol", "--seed", "1"]);
    let text = stdout(&out);
    let body: Vec<&str> = text.lines().skip(2).collect();
    assert_eq!(body.len(), 8);
    assert_eq!(body[0], "0,0,0,0");
    assert_eq!(body[1], "1,0.5,0.5,0.5");
    let vertex = stdout(&weakcover(&["design", "--dim", "5", "--n", "4", "--scheme", "vertex", "--seed", "2"]));
    assert_eq!(vertex.lines().nth(2).unwrap(), "0,0.5,0.5,0.5,0.5,0.5");
}

#[test]
fn output_file_and_thread_count_do_not_change_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let args = ["coverage", "--dim", "6", "--n", "500", "--r-grid", "0.4:0.8:0.1", "--targets", "3000", "--seed", "4"];
    let mut with_file = args.to_vec();
    with_file.extend(["--threads", "2", "--out", a.to_str().unwrap()]);
    assert!(weakcover(&with_file).status.success());
    let to_stdout = weakcover(&args);
    assert_eq!(fs::read(&a).unwrap(), to_stdout.stdout);
}
