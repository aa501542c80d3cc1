use std::fs;
use std::process::{Command, Output};

use macexp::curve::DataTable;

fn macexp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_macexp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn fig1_has_both_curves_and_marked_rates() {
    let o = macexp(&["figure", "fig1", "--resolution", "9"]);
    assert_eq!(o.status.code(), Some(0));
    let t = DataTable::from_csv(&stdout(&o)).unwrap();
    assert_eq!(t.columns, ["rate", "random_coding", "expurgated"]);
    assert_eq!(t.rows.len(), 9);
    assert!(t.meta.contains_key("critical_rate") && t.meta.contains_key("expurgation_rate"));
}

#[test]
fn figure_files_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let o = macexp(&["figure", "fig4c", "--resolution", "7", "--output", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        assert!(o.stdout.is_empty());
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn csv_and_json_agree() {
    let csv = DataTable::from_csv(&stdout(&macexp(&["figure", "fig4a", "--resolution", "5"]))).unwrap();
    let json = DataTable::from_json(&stdout(&macexp(&["figure", "fig4a", "--resolution", "5", "--format", "json"]))).unwrap();
    assert_eq!(csv.columns, json.columns);
    assert_eq!(csv.meta, json.meta);
    for (r, s) in csv.rows.iter().zip(&json.rows) {
        for (x, y) in r.iter().zip(s) {
            assert!((x - y).abs() <= 1e-11 * y.abs().max(1e-300), "{x} vs {y}");
        }
    }
    // CSV -> JSON -> CSV is lossless.
    let round = DataTable::from_json(&csv.to_json()).unwrap();
    assert_eq!(round.to_csv(), csv.to_csv());
}

#[test]
fn fig2_starts_above_slepian_wolf() {
    let t = DataTable::from_csv(&stdout(&macexp(&["figure", "fig2", "--resolution", "5"]))).unwrap();
    let sw = t.column("slepian_wolf").unwrap();
    let v = t.column("virtual").unwrap();
    assert!(v[0] > sw[0]);
    assert!(v[2] < sw[2]);
    let ts = t.column("time_sharing").unwrap();
    assert!(ts.iter().zip(&sw).take(4).all(|(a, b)| a < b));
}

#[test]
fn usage_errors_exit_2_and_write_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never.csv");
    let o = macexp(&["figure", "fig9", "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
    let o = macexp(&["figure", "fig1", "--resolution", "1", "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
    assert_eq!(macexp(&["bogus"]).status.code(), Some(2));
}

#[test]
fn simulate_requires_seed() {
    let o = macexp(&["simulate", "pam", "--l0", "15", "--l1", "3", "--noise-std", "0.25"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--seed"));
}

#[test]
fn computation_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.json");
    let o = macexp(&["simulate", "pam", "--l0", "15", "--l1", "2", "--noise-std", "0.25", "--seed", "1", "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.exists());
    let o = macexp(&["gaussian", "poltyrev", "--mu", "-1"]);
    assert_eq!(o.status.code(), Some(1));
    let o = macexp(&["su", "--noise", "0.6,0.6"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn db_suffix_is_accepted() {
    let a = stdout(&macexp(&["gaussian", "su", "--snr", "30db", "--rate", "0"]));
    let b = stdout(&macexp(&["gaussian", "su", "--snr", "1000", "--rate", "0"]));
    assert_eq!(a, b);
    let t = DataTable::from_csv(&a).unwrap();
    assert_eq!(t.rows[0][2], 250.0);
    assert_eq!(macexp(&["gaussian", "su", "--snr", "-3"]).status.code(), Some(2));
}

#[test]
fn su_bits_scale() {
    let nats = DataTable::from_csv(&stdout(&macexp(&["su", "--noise", "0.98,0.02", "--rate", "0"]))).unwrap();
    let bits = DataTable::from_csv(&stdout(&macexp(&["su", "--noise", "0.98,0.02", "--rate", "0", "--bits"]))).unwrap();
    let ratio = nats.rows[0][3] / bits.rows[0][3];
    assert!((ratio - std::f64::consts::LN_2).abs() < 1e-9);
}

#[test]
fn simulate_split_reports_exact_value() {
    let o = macexp(&[
        "simulate", "split", "--generator", r#"{"p":2,"rows":[[1,0,1],[0,1,1]]}"#, "--k1", "1", "--noise", "0.9,0.1",
        "--trials", "20000", "--seed", "3", "--paired",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let est = v["estimate"].as_f64().unwrap();
    let exact = v["exact_if_available"].as_f64().unwrap();
    assert!((est - exact).abs() < 4.0 * (exact * (1.0 - exact) / 20000.0).sqrt());
    assert_eq!(v["mismatches"], 0);
}

#[test]
fn simulate_is_deterministic() {
    let args = ["simulate", "pam", "--l0", "15", "--l1", "3", "--noise-std", "0.25", "--trials", "5000", "--seed", "11"];
    assert_eq!(stdout(&macexp(&args)), stdout(&macexp(&args)));
}

#[test]
fn search_and_transform_on_example_mac() {
    let o = macexp(&["search", "--example", "0.1,0.3"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["result"]["exhaustive"], true);
    let spec = v["result"]["spec"].to_string();
    let o = macexp(&["transform", "--example", "0.1,0.3", "--spec", &spec]);
    let t: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(t["independence_deviation"].as_f64().unwrap() < 1e-12);
    assert_eq!(t["exponent"], v["result"]["exponent"]);
}

#[test]
fn channel_file_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mac.json");
    fs::write(&path, r#"{"m":2,"kind":"additive","probs":[0.9,0.1]}"#).unwrap();
    let o = macexp(&["mac", "--channel", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let sw = &v["slepian_wolf"];
    assert_eq!(sw["value"], sw["e3"]);
}
