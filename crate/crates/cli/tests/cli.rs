use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn lipbound(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lipbound"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "status {:?}, stderr: {}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write_kernel(dir: &Path, name: &str, cout: usize, cin: usize, s: usize, data: &[f64]) -> String {
    let path = dir.join(name);
    let doc = serde_json::json!({"cout": cout, "cin": cin, "s": s, "data": data});
    std::fs::write(&path, doc.to_string()).unwrap();
    path.to_str().unwrap().to_owned()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

#[test]
fn bound_of_kernel_files() {
    let dir = tempfile::tempdir().unwrap();
    let mut centre = vec![0.0; 9];
    centre[4] = 1.0;
    let id = write_kernel(dir.path(), "id.json", 1, 1, 3, &centre);
    let rows = csv_rows(&stdout(&lipbound(&["bound", "--kernel", &id, "--no-timing"])));
    assert_eq!(rows[0].join(","), "kernel,bound,raw_grid_bound,samples,certified,alpha,time_ms");
    assert_eq!(rows[1][1..], ["1.0", "1.0", "10", "false", "0.2", "0.0"].map(String::from));

    let pair = write_kernel(dir.path(), "pair.json", 1, 2, 1, &[1.0, 1.0]);
    let out = stdout(&lipbound(&["bound", "--kernel", &pair, "--format", "json"]));
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!((v[0]["bound"].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-15);
    assert_eq!(v[0]["alpha"], 0.0);
}

#[test]
fn certified_bound_is_scaled_raw_bound() {
    let out = stdout(&lipbound(&[
        "bound", "--kernel", "random:3:2x2x3", "--certified", "--samples", "8", "--format", "json",
    ]));
    let v: Value = serde_json::from_str(&out).unwrap();
    let (bound, raw) = (v[0]["bound"].as_f64().unwrap(), v[0]["raw_grid_bound"].as_f64().unwrap());
    assert!((bound - raw / (1.0 - 0.25)).abs() < 1e-12 * bound);
    assert_eq!(v[0]["certified"], true);
}

#[test]
fn exact_matches_closed_form_and_power_method_lags() {
    let dir = tempfile::tempdir().unwrap();
    let ones = write_kernel(dir.path(), "ones.json", 1, 1, 3, &[1.0; 9]);
    let rows = csv_rows(&stdout(&lipbound(&["exact", "--kernel", &ones, "--n", "6"])));
    let sigma: f64 = rows[1][3].parse().unwrap();
    let expect = (1.0 + 2.0 * (std::f64::consts::PI / 7.0).cos()).powi(2);
    assert!((sigma - expect).abs() < 1e-10);
    assert_eq!(rows[1][2], "dense_oracle");

    let rows = csv_rows(&stdout(&lipbound(&[
        "exact", "--kernel", &ones, "--n", "6", "--power", "--iters", "3",
    ])));
    assert_eq!(rows[1][2], "power_method");
    assert_eq!(rows[1][4], "3");
    assert!(rows[1][3].parse::<f64>().unwrap() <= sigma * (1.0 + 1e-12));
}

#[test]
fn gap_series_is_non_increasing() {
    let out = stdout(&lipbound(&["gap", "--kernel", "random:1:1x1x3", "--n", "4,8,16"]));
    let rows = csv_rows(&out);
    assert_eq!(rows[0].join(","), "n,lipbound,sigma1,gamma");
    let gammas: Vec<f64> = rows[1..].iter().map(|r| r[3].parse().unwrap()).collect();
    assert_eq!(gammas.len(), 3);
    assert!(gammas.windows(2).all(|w| w[1] <= w[0] + 1e-9), "{gammas:?}");
}

#[test]
fn compare_table_over_seeded_kernels() {
    let out = stdout(&lipbound(&[
        "compare", "--kernel", "random:*:1x2x3", "--repeats", "3", "--n", "8", "--no-timing",
    ]));
    let rows = csv_rows(&out);
    assert_eq!(rows[0].join(","), "method,value,ratio_to_exact,time_ms");
    let methods: Vec<&str> = rows[1..].iter().map(|r| r[0].as_str()).collect();
    assert_eq!(methods, ["lipbound", "power_method", "sedghi", "frobenius", "dense_oracle"]);
    let ratio = |m: usize| rows[m][2].parse::<f64>().unwrap();
    assert_eq!(ratio(5), 1.0);
    assert!(ratio(2) <= 1.0 + 1e-12);
    assert!(ratio(4) >= 1.0);
    assert!(rows[1..].iter().all(|r| r[3] == "0.0"));
}

#[test]
fn bench_writes_to_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bench.json");
    let out = lipbound(&[
        "bench", "--kernel", "random:0:1x1x3", "--kernel", "random:0:2x3x5", "--n", "8",
        "--repeats", "3", "--format", "json", "--output", path.to_str().unwrap(),
    ]);
    assert!(stdout(&out).is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1]["shape"], "2x3x5");
    for r in rows {
        assert!(r["lipbound_ms"].as_f64().unwrap() > 0.0);
        assert!(r["speedup"].as_f64().unwrap() > 0.0);
    }
}

#[test]
fn check_reports_every_property() {
    let rows = csv_rows(&stdout(&lipbound(&["check", "--seed", "3"])));
    assert_eq!(rows[0].join(","), "check,cases,failures,worst,status");
    assert_eq!(rows.len(), 10);
    assert!(rows[1..].iter().all(|r| r[4] == "pass"));
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let even = write_kernel(dir.path(), "even.json", 1, 1, 2, &[1.0; 4]);
    let missing = dir.path().join("absent.json");
    for args in [
        vec!["bound", "--kernel", "random:1:1x3"],
        vec!["bound", "--kernel", missing.to_str().unwrap()],
        vec!["bound", "--kernel", &even],
        vec!["bound", "--kernel", "random:0:1x1x5", "--certified", "--samples", "4"],
        vec!["exact", "--kernel", "random:0:1x1x3"],
        vec!["frobnicate"],
    ] {
        let out = lipbound(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn computation_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let zero = write_kernel(dir.path(), "zero.json", 1, 1, 3, &[0.0; 9]);
    let out = lipbound(&["compare", "--kernel", &zero, "--n", "4"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("zero norm"));
}
