use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn fracount(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracount"))
        .args(args)
        .env_remove("FRACOUNT_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

/// Rows of a CSV document, header first.
fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().map(|l| l.split(',').map(str::to_owned).collect()).collect()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

#[test]
fn poisson_pmf_table() {
    let out = fracount(&["pmf", "--mu", "1", "--beta", "0", "--rate", "1", "--time", "1", "--nmax", "5"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(!text.contains('\r'));
    let rows = csv_rows(&text);
    assert_eq!(rows[0], ["n", "probability"]);
    let mut factorial = 1.0;
    for n in 0..=5 {
        if n > 0 {
            factorial *= n as f64;
        }
        let want = (-1.0f64).exp() / factorial;
        let got: f64 = rows[n + 1][1].parse().unwrap();
        assert_eq!(rows[n + 1][0], n.to_string());
        assert!(((got - want) / want).abs() < 1e-10, "n={n}: {got} vs {want}");
    }
    let footer = rows.last().unwrap();
    assert_eq!(footer[0], "tail_mass");
    let shown: f64 = rows[1..7].iter().map(|r| r[1].parse::<f64>().unwrap()).sum();
    let tail: f64 = footer[1].parse().unwrap();
    assert!((tail - (1.0 - shown)).abs() < 1e-15);
}

#[test]
fn mittag_leffler_zero_count() {
    let out = fracount(&["pmf", "--mu", "0.5", "--beta", "0", "--rate", "1", "--time", "1", "--nmax", "20"]);
    assert_eq!(code(&out), 0);
    let rows = csv_rows(&stdout(&out));
    assert_eq!(rows.len(), 1 + 21 + 1);
    // E_{1/2}(-1) = e·erfc(1)
    let want = std::f64::consts::E * 0.157_299_207_050_285_13;
    let got: f64 = rows[1][1].parse().unwrap();
    assert!(((got - want) / want).abs() < 1e-12, "{got} vs {want}");
}

#[test]
fn constraint_violation_exits_with_two() {
    let out = fracount(&["pmf", "--mu", "1", "--beta", "0.5", "--time", "1"]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("beta must satisfy -mu < beta <= 1-mu"), "{err}");
    assert!(out.stdout.is_empty());

    for args in [
        vec!["pmf", "--mu", "0", "--beta", "0", "--time", "1"],
        vec!["pmf", "--mu", "0.5", "--beta", "0", "--rate", "-1", "--time", "1"],
        vec!["pmf", "--mu", "0.5", "--beta", "0", "--time", "-1"],
        vec!["pmf", "--mu", "0.5", "--beta", "0"],
        vec!["pmf", "--mu", "0.5", "--beta", "0", "--time", "1", "--rel-tol", "2"],
        vec!["stirling", "--kind", "second", "--max", "5000"],
        vec!["simulate", "--mu", "0.5", "--beta", "0", "--rng", "mt19937"],
        vec!["frobnicate"],
    ] {
        assert_eq!(code(&fracount(&args)), 2, "{args:?}");
    }
}

#[test]
fn numeric_failure_exits_with_three() {
    let out = fracount(&["pmf", "--mu", "0.5", "--beta", "0", "--time", "30", "--nmax", "3", "--max-terms", "8"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("numerical error"));
}

#[test]
fn poisson_moments() {
    let out = fracount(&["moments", "--mu", "1", "--beta", "0", "--rate", "1", "--time", "4", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    let row = &v["values"]["rows"][0];
    for (key, want) in [("mean", 4.0), ("variance", 4.0), ("skewness", 0.5), ("kurtosis_excess", 0.25)] {
        let got = row[key].as_f64().unwrap();
        assert!(((got - want) / want).abs() < 1e-10, "{key}: {got}");
    }
    assert_eq!(v["params"]["mu"], 1.0);
    assert!(v["meta"]["tolerances"]["rel_tol"].is_number());
    assert!(v["meta"]["seed"].is_null());
}

#[test]
fn json_and_csv_agree_bit_for_bit() {
    let base = ["pmf", "--mu", "0.7", "--beta", "0.15", "--rate", "1.3", "--time", "2"];
    let csv = stdout(&fracount(&base));
    let mut with_json = base.to_vec();
    with_json.extend(["--format", "json"]);
    let v = json(&fracount(&with_json));
    let rows = v["values"]["rows"].as_array().unwrap();
    let csv_rows = csv_rows(&csv);
    assert_eq!(rows.len() + 2, csv_rows.len());
    for (obj, line) in rows.iter().zip(&csv_rows[1..]) {
        let from_json = obj["probability"].as_f64().unwrap();
        let from_csv: f64 = line[1].parse().unwrap();
        assert_eq!(from_json.to_bits(), from_csv.to_bits());
    }
    let reprinted: Value = serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap();
    assert_eq!(reprinted, v);
}

#[test]
fn fractional_triangle_reduces_to_stirling() {
    let frac = csv_rows(&stdout(&fracount(&["stirling", "--kind", "frac", "--mu", "1", "--beta", "0", "--max", "8"])));
    let exact = csv_rows(&stdout(&fracount(&["stirling", "--kind", "second", "--max", "8"])));
    assert_eq!(frac.len(), exact.len());
    for (f, e) in frac.iter().zip(&exact).skip(1) {
        assert_eq!(f[..2], e[..2]);
        assert_eq!(f[2].parse::<f64>().unwrap(), e[2].parse::<f64>().unwrap(), "{f:?}");
    }
    let first = csv_rows(&stdout(&fracount(&["stirling", "--kind", "first", "--max", "4"])));
    assert!(first.contains(&vec!["4".into(), "2".into(), "11".into()]));
    assert!(first.contains(&vec!["4".into(), "1".into(), "-6".into()]));
}

#[test]
fn bell_numbers() {
    let rows = csv_rows(&stdout(&fracount(&["bell", "--max", "7"])));
    let bell = [1.0, 1.0, 2.0, 5.0, 15.0, 52.0, 203.0, 877.0];
    for (m, want) in bell.iter().enumerate() {
        assert_eq!(rows[m + 1][1].parse::<f64>().unwrap(), *want);
    }
}

#[test]
fn time_grid_output() {
    let out = fracount(&[
        "moments", "--mu", "0.5", "--beta", "0.25", "--time-start", "1", "--time-stop", "3", "--time-steps", "3",
    ]);
    assert_eq!(code(&out), 0);
    let rows = csv_rows(&stdout(&out));
    assert_eq!(rows.len(), 4);
    let times: Vec<f64> = rows[1..].iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(times, [1.0, 2.0, 3.0]);
    let means: Vec<f64> = rows[1..].iter().map(|r| r[1].parse().unwrap()).collect();
    // mean grows like t^(mu+beta)
    assert!((means[2] / means[0] - 3f64.powf(0.75)).abs() < 1e-12);
}

#[test]
fn interarrival_tables() {
    let out = fracount(&["interarrival", "--mu", "1", "--beta", "0", "--rate", "2", "--time", "0.5"]);
    let rows = csv_rows(&stdout(&out));
    assert_eq!(rows[0], ["tau", "density", "survival"]);
    let density: f64 = rows[1][1].parse().unwrap();
    let survival: f64 = rows[1][2].parse().unwrap();
    assert!((density - 2.0 * (-1.0f64).exp()).abs() < 1e-13);
    assert!((survival - (-1.0f64).exp()).abs() < 1e-14);

    let out = fracount(&["interarrival", "--mu", "0.5", "--beta", "0", "--laplace", "0.5,9", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    for row in v["values"]["rows"].as_array().unwrap() {
        let u = row["u"].as_f64().unwrap();
        let want = 1.0 / (1.0 + u.sqrt());
        assert!((row["laplace_quadrature"].as_f64().unwrap() - want).abs() < 1e-9);
    }
    assert!(v["values"]["rows"][0]["laplace_series"].is_null());
    let series = v["values"]["rows"][1]["laplace_series"].as_f64().unwrap();
    assert!((series - 0.25).abs() < 1e-9);
}

#[test]
fn simulation_is_reproducible() {
    let args = ["simulate", "--mu", "0.7", "--beta", "0.1", "--time", "1", "--samples", "50000", "--seed", "9"];
    let a = fracount(&args);
    let b = fracount(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let rows = csv_rows(&stdout(&a));
    let get = |name: &str| -> f64 { rows.iter().find(|r| r[0] == name).unwrap()[1].parse().unwrap() };
    assert!((get("mean") - get("theory_mean")).abs() < 4.0 * get("mean_se"));

    let other = fracount(&["simulate", "--mu", "0.7", "--beta", "0.1", "--time", "1", "--samples", "50000", "--seed", "10"]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn simulation_kinds() {
    let out = fracount(&[
        "simulate", "--mu", "1", "--beta", "0", "--kind", "compound", "--jump", "degenerate:3", "--time", "2",
        "--samples", "20000", "--format", "json",
    ]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    let rows = v["values"]["rows"].as_array().unwrap();
    let stat = |name: &str| rows.iter().find(|r| r["statistic"] == name).unwrap()["value"].as_f64().unwrap();
    assert_eq!(stat("theory_mean"), 6.0);
    assert!((stat("mean") - 6.0).abs() < 4.0 * stat("mean_se"));
    assert_eq!(v["meta"]["seed"], 42);

    let out = fracount(&["simulate", "--mu", "1", "--beta", "-0.5", "--kind", "path", "--time", "4", "--samples", "20000"]);
    let rows = csv_rows(&stdout(&out));
    let get = |name: &str| -> f64 { rows.iter().find(|r| r[0] == name).unwrap()[1].parse().unwrap() };
    assert_eq!(get("theory_mean"), 4.0);
    assert!((get("mean") - 4.0).abs() < 4.0 * get("mean_se"));

    let out = fracount(&["simulate", "--mu", "0.5", "--beta", "0.2", "--kind", "path", "--time", "1"]);
    assert_eq!(code(&out), 2);

    let out = fracount(&[
        "simulate", "--mu", "1", "--beta", "0", "--kind", "first-arrival", "--samples", "5", "--emit", "samples",
    ]);
    let rows = csv_rows(&stdout(&out));
    assert_eq!(rows[0], ["index", "value"]);
    assert_eq!(rows.len(), 6);
    assert!(rows[1..].iter().all(|r| r[1].parse::<f64>().unwrap() > 0.0));
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).expect("output file exists")
}

#[test]
fn output_locations() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_fracount"))
        .args(["pmf", "--mu", "1", "--beta", "0", "--time", "1", "--nmax", "3"])
        .env("FRACOUNT_OUT_DIR", dir.path().join("tables"))
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let text = read(&dir.path().join("tables").join("pmf.csv"));
    assert!(text.starts_with("n,probability\n"));

    let target = dir.path().join("m.json");
    let out = fracount(&[
        "moments", "--mu", "1", "--beta", "0", "--time", "2", "--format", "json", "--output",
        target.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_str(&read(&target)).unwrap();
    assert_eq!(v["values"]["rows"][0]["mean"], 2.0);
    for key in ["params", "inputs", "values", "meta"] {
        assert!(v.get(key).is_some(), "{key}");
    }
}

#[test]
fn verify_single_properties() {
    let out = fracount(&["verify", "--grid", "small", "--property", "3", "--property", "5", "--format", "json"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["values"]["all_passed"], true);
    assert_eq!(v["values"]["rows"].as_array().unwrap().len(), 2);
    assert_eq!(code(&fracount(&["verify", "--property", "11"])), 2);
}

#[test]
fn verify_default_grid_passes() {
    let out = fracount(&["verify", "--grid", "default", "--samples", "100000", "--seed", "42"]);
    let rows = csv_rows(&stdout(&out));
    assert_eq!(rows[0], ["property", "name", "passed", "seconds", "detail"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
}
