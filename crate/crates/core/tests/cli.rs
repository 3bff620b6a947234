use std::process::{Command, Output};

use serde_json::Value;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_padic-collatz"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let out = bin(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_str(&stdout(&out)).unwrap()
}

#[test]
fn orbit_of_27_reaches_one_two() {
    let v = json(&["orbit", "--p", "2", "--q", "3", "--u", "27", "--max-steps", "1000"]);
    assert_eq!(v["command"], "orbit");
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["result"]["canonical_cycle"]["members"], serde_json::json!(["1", "2"]));
    assert_eq!(v["config"]["args"]["orbit"]["max_steps"], 1000);
}

#[test]
fn orbit_fixed_point_and_negative_cycle() {
    let v = json(&["orbit", "--p", "2", "--q", "3", "--u", "0"]);
    assert_eq!(v["result"]["cycle"]["period"], 1);
    let v = json(&["orbit", "--p", "5", "--q", "13", "--u", "-2"]);
    assert_eq!(v["result"]["canonical_cycle"]["members"], serde_json::json!(["-1", "-2", "-5"]));
}

#[test]
fn exit_codes() {
    let truncated = bin(&["orbit", "--p", "2", "--q", "3", "--u", "27", "--max-steps", "10"]);
    assert_eq!(truncated.status.code(), Some(2));
    let usage = bin(&["orbit", "--p", "2", "--q", "3"]);
    assert_eq!(usage.status.code(), Some(64));
    let domain = bin(&["orbit", "--p", "6", "--q", "5", "--u", "1"]);
    assert_eq!(domain.status.code(), Some(65));
    assert!(String::from_utf8_lossy(&domain.stderr).contains("prime"));
    let not_unit = bin(&["psiprime", "--u", "1", "--omega", "3", "--n-max", "4"]);
    assert_eq!(not_unit.status.code(), Some(65));
}

#[test]
fn table_small_ranges() {
    let out = bin(&["table", "--pairs", "7:19", "--range", "-100..-1", "--format", "csv"]);
    let text = stdout(&out);
    assert!(text.starts_with("p,q,representative,cycle\n"));
    assert!(text.lines().any(|l| l == "7,19,-5,-5;-13;-35"));
    let out = bin(&["table", "--pairs", "2:3", "--range", "1..10", "--format", "csv"]);
    assert_eq!(stdout(&out), "p,q,representative,cycle\n2,3,1,1;2\n");
}

#[test]
fn table_output_independent_of_threads() {
    let args = |t: &'static str| ["table", "--pairs", "2:3,5:7,13:47", "--range", "-3000..-1", "--format", "csv", "--threads", t];
    assert_eq!(stdout(&bin(&args("1"))), stdout(&bin(&args("4"))));
}

#[test]
fn table_matches_golden_file() {
    let out = bin(&["table", "--pairs", "table", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let golden = include_str!("golden/table_pairs.csv");
    assert_eq!(stdout(&out), golden);
    assert!(golden.lines().any(|l| l == "2,3,-17,-17;-25;-37;-55;-82;-41;-61;-91;-136;-68;-34"));
}

#[test]
fn phi_of_one_is_minus_one_third() {
    let v = json(&["phi", "--p", "2", "--q", "3", "--u", "1", "--exact"]);
    assert_eq!(v["result"]["value"], "-1/3");
    assert_eq!(v["result"]["digits"]["period"], serde_json::json!([1, 0]));
    let v = json(&["phi", "--p", "2", "--q", "3", "--u", "1", "--exact", "--decimal"]);
    assert_eq!(v["result"]["value"], "-0.33333333333333333333");
}

#[test]
fn phi_inverse_of_minus_one() {
    let v = json(&["phi-inv", "--p", "3", "--q", "5", "--period", "2"]);
    assert_eq!(v["result"]["value"], "-1");
    let v = json(&["phi-inv", "--p", "2", "--q", "3", "--period", "1"]);
    assert_eq!(v["result"]["value"], "-1");
}

#[test]
fn catalan_pairs() {
    let out = bin(&["catalan", "--p", "2", "--q", "3", "--bound", "64", "--format", "csv"]);
    assert_eq!(stdout(&out), "k,ell,difference\n1,0,-1\n2,1,-1\n1,1,1\n3,2,1\n");
}

#[test]
fn periodic_census() {
    let v = json(&["periodic", "--p", "3", "--q", "5", "--k", "4"]);
    assert_eq!(v["result"]["count"], 81);
}

#[test]
fn mean_drift_in_bracket_and_reproducible() {
    let v = json(&["stats", "mean-drift", "--p", "2", "--q", "3", "--m", "12", "--full"]);
    let r = &v["result"];
    let mean = r["empirical_mean"].as_f64().unwrap();
    assert!(r["lower_bound"].as_f64().unwrap() <= mean && mean <= r["upper_bound"].as_f64().unwrap());
    assert_eq!(r["within_bounds"], true);
    let args = ["stats", "mean-drift", "--p", "2", "--q", "3", "--m", "30", "--samples", "300", "--rng-seed", "9", "--format", "csv"];
    assert_eq!(stdout(&bin(&args)), stdout(&bin(&args)));
}

#[test]
fn stats_subcommands() {
    let v = json(&["stats", "height", "--p", "2", "--u", "-1024"]);
    assert_eq!(v["result"]["height"], 11);
    let v = json(&["stats", "tranche", "--p", "2", "--q", "3", "--u", "1099511627777", "--m", "8"]);
    assert_eq!(v["result"]["within_bounds"], true);
    let v = json(&["stats", "nz", "--p", "2", "--q", "3", "--u", "1000001", "--m", "5"]);
    assert_eq!(v["result"]["within"], true);
    let out = bin(&["stats", "ratios", "--p", "2", "--q", "3", "--u", "27", "--n", "50", "--format", "csv"]);
    assert_eq!(stdout(&out).lines().count(), 51);
    let v = json(&["stats", "candidate", "--pairs", "2:3,2:5"]);
    assert_eq!(v["result"][0]["candidate"], true);
    assert_eq!(v["result"][1]["candidate"], false);
}

#[test]
fn density_first_witnesses() {
    let v = json(&["density", "--u", "7", "--n", "2"]);
    assert_eq!(v["result"][1]["w_n"], "3");
}

#[test]
fn psiprime_series() {
    let out = bin(&["psiprime", "--u", "1", "--n-max", "4", "--format", "csv"]);
    assert_eq!(stdout(&out), "n,psi_prime,ratio\n1,0,0\n2,4,2\n3,6,2\n4,8,2\n");
}

#[test]
fn series_commands() {
    // 1/(1+T) over F_2
    let v = json(&["series", "orbit", "--p", "2", "--num", "1", "--den", "1,1"]);
    assert!(v["result"]["cycle"].is_object());
    let v = json(&["series", "height", "--p", "3", "--num", "1,2,0,1", "--den", "1,1"]);
    assert_eq!(v["result"]["height"], 3);
    let v = json(&["series", "inverse", "--p", "2", "--period", "1"]);
    assert!(v["result"]["value"]["display"].is_string());
}

#[test]
fn output_file_and_plain_format() {
    let dir = std::env::temp_dir().join(format!("padic-collatz-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("orbit.json");
    let out = bin(&["orbit", "--p", "2", "--q", "3", "--u", "5", "--output", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["command"], "orbit");
    std::fs::remove_dir_all(&dir).unwrap();
    let plain = stdout(&bin(&["stats", "height", "--p", "3", "--u", "9", "--format", "plain"]));
    assert!(plain.contains("height = 3"));
}
