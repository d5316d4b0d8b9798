use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_egg-metrics"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid json")
}

fn csv_rows(args: &[&str]) -> (Vec<String>, Vec<Vec<String>>) {
    let out = run(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let header = reader.headers().unwrap().iter().map(String::from).collect();
    let rows = reader
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header
        .iter()
        .position(|h| h == name)
        .unwrap_or_else(|| panic!("no column {name} in {header:?}"))
}

#[test]
fn kobayashi_along_z1_is_the_disc_metric() {
    let v = json(&["kobayashi", "--p", "0.5", "--v", "1,0;0,0"]);
    // |v1| / (1 - p^2)
    assert_eq!(v["value"].as_f64().unwrap(), 1.0 / 0.75);
    assert_eq!(v["regime"], "K1");
}

#[test]
fn kobayashi_along_zhat_matches_closed_form() {
    let v = json(&["kobayashi", "--p", "0.5", "--v", "0,0;1,0"]);
    let expected = 1.0 / (1.0 - 0.5f64.sqrt()).sqrt();
    let got = v["value"].as_f64().unwrap();
    assert!((got - expected).abs() <= 1e-12 * expected, "{got} vs {expected}");
    assert_eq!(v["w"], "inf");
}

#[test]
fn kobayashi_at_general_point_uses_z() {
    let v = json(&[
        "--n",
        "3",
        "kobayashi",
        "--z",
        "0,0;0,0;0,0",
        "--v",
        "0,0;3,0;4,0",
    ]);
    // At the origin the metric is the gauge, here |vhat|.
    assert!((v["value"].as_f64().unwrap() - 5.0).abs() < 1e-12);
}

#[test]
fn exit_codes_follow_error_classes() {
    assert_eq!(
        run(&["kobayashi", "--p", "0.5", "--v", "1,0;x"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["kobayashi", "--p", "0.5", "--v", "1,0"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["kobayashi", "--p", "1.2", "--v", "1,0;0,0"]).status.code(),
        Some(3)
    );
    assert_eq!(run(&["--m", "0.7", "wu", "--p", "0.5"]).status.code(), Some(3));
    assert_eq!(run(&["wu", "--z", "0.9,0;0.9,0"]).status.code(), Some(3));
    assert_eq!(
        run(&["fit", "--p", "0.5", "--count", "10"]).status.code(),
        Some(4)
    );
}

#[test]
fn wu_at_origin_is_the_identity() {
    let v = json(&["--n", "3", "wu", "--p", "0"]);
    let entries = v["entries"].as_array().unwrap();
    for (i, row) in entries.iter().enumerate() {
        for (j, e) in row.as_array().unwrap().iter().enumerate() {
            assert_eq!(e["re"].as_f64().unwrap(), if i == j { 1.0 } else { 0.0 });
            assert_eq!(e["im"].as_f64().unwrap(), 0.0);
        }
    }
}

#[test]
fn fit_reproduces_axis_form_and_draws_svg() {
    let dir = std::env::temp_dir().join(format!("egg-metrics-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let svg = dir.join("fit.svg");
    let v = json(&[
        "--m",
        "0.1",
        "fit",
        "--p",
        "0.7",
        "--emit-svg",
        svg.to_str().unwrap(),
    ]);
    let r1 = v["r1"].as_f64().unwrap();
    let r2 = v["r2"].as_f64().unwrap();
    assert!((r1 * (1.0 - 0.49f64).powi(2) - 1.0).abs() <= 1e-3);
    assert!((r2 * (1.0 - 0.7f64.powf(0.2)) - 1.0).abs() <= 1e-3);
    assert_eq!(v["samples_used"], 4096);

    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<?xml"));
    assert!(text.trim_end().ends_with("</svg>"));
    for class in ["upper-curve", "lower-curve", "ellipse", "tangency"] {
        assert!(text.contains(&format!("class=\"{class}\"")), "missing {class}");
    }
    assert_eq!(text.matches("<svg").count(), 1);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn empty_scan_grid_gives_header_only() {
    let out = run(&[
        "--format",
        "csv",
        "scan",
        "--quantity",
        "kobayashi_value",
        "--grid",
        "",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("m,n,p"));
}

#[test]
fn wu_entries_scan_matches_axis_form() {
    let (header, rows) = csv_rows(&[
        "--format",
        "csv",
        "scan",
        "--quantity",
        "wu_entries",
        "--grid",
        "0.1:0.9:5",
    ]);
    assert_eq!(rows.len(), 5);
    let (p_col, h11) = (column(&header, "p"), column(&header, "h1_1_re"));
    let h22 = column(&header, "h2_2_re");
    for row in rows {
        let p: f64 = row[p_col].parse().unwrap();
        let a: f64 = row[h11].parse().unwrap();
        let b: f64 = row[h22].parse().unwrap();
        assert!((a * (1.0 - p * p).powi(2) - 1.0).abs() < 1e-12);
        assert!((b * (1.0 - p.powf(0.5)) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn hsc_scan_respects_the_bound() {
    let (header, rows) = csv_rows(&[
        "--n",
        "3",
        "--m",
        "0.4",
        "--format",
        "csv",
        "scan",
        "--quantity",
        "hsc",
        "--grid",
        "0.1,0.5,0.9",
        "--directions",
        "50",
    ]);
    assert_eq!(rows.len(), 150);
    let value = column(&header, "value");
    for row in rows {
        assert!(row[value].parse::<f64>().unwrap() <= -0.5);
    }
}

#[test]
fn verify_is_deterministic() {
    let a = run(&["--format", "csv", "verify", "--suite", "domain"]);
    let b = run(&["--format", "csv", "verify", "--suite", "domain"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(!a.stdout.is_empty());
}

#[test]
fn thread_cap_does_not_change_results() {
    let capped = Command::new(env!("CARGO_BIN_EXE_egg-metrics"))
        .args(["verify", "--suite", "kobayashi"])
        .env("WU_METRIC_THREADS", "1")
        .output()
        .unwrap();
    let free = run(&["verify", "--suite", "kobayashi"]);
    assert_eq!(capped.status.code(), Some(0));
    assert_eq!(capped.stdout, free.stdout);
}
