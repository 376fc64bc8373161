use std::path::Path;
use std::process::{Command, Output};

fn run(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_procchain")).args(args).env("PROCCHAIN_CACHE", cache).output().expect("binary runs")
}

fn data(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path).unwrap().lines().filter(|l| !l.starts_with('#')).map(String::from).collect()
}

fn text(o: &Output) -> String {
    format!("{}{}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr))
}

#[test]
fn single_site_coefficient_is_exact_and_cached() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let out = dir.path().join("out");
    let out_s = out.to_str().unwrap();
    let args = ["coefficients", "-q", "--mu", "0.5", "--set", "k_max=1", "--nu-max", "0", "--out-dir", out_s];
    let first = run(&cache, &args);
    assert_eq!(first.status.code(), Some(0), "{}", text(&first));
    assert!(text(&first).contains("0 from cache"));
    let rows = data(&out.join("coefficients.csv"));
    assert_eq!(rows[1], "2,1,0.5,1,0,2,0,-6,0,1,1,1");

    let second = run(&cache, &args);
    assert_eq!(second.status.code(), Some(0));
    assert!(text(&second).contains("1 from cache"), "{}", text(&second));
    assert_eq!(data(&out.join("coefficients.csv")), rows);
}

#[test]
fn order_beyond_capacity_exits_4_with_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let o =
        run(dir.path(), &["coefficients", "-q", "--set", "k_min=3", "--set", "k_max=3", "--nu-max", "8", "--set", "nu_min=8"]);
    assert_eq!(o.status.code(), Some(4), "{}", text(&o));
    assert!(text(&o).contains("estimated single-core cost"));
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out_s = out.to_str().unwrap();
    let empty = run(dir.path(), &["lobe", "-q", "--set", "mu_grid=", "--out-dir", out_s]);
    assert_eq!(empty.status.code(), Some(2), "{}", text(&empty));
    let no_twist = run(dir.path(), &["exponents", "-q", "--set", "observable=zeta", "--twists", "", "--out-dir", out_s]);
    assert_eq!(no_twist.status.code(), Some(2), "{}", text(&no_twist));
    let unknown = run(dir.path(), &["frobnicate"]);
    assert_eq!(unknown.status.code(), Some(2));
    let bad_key = run(dir.path(), &["lobe", "--set", "no_such_key=1"]);
    assert_eq!(bad_key.status.code(), Some(2), "{}", text(&bad_key));
}

#[test]
fn oracle_passes_and_names_injected_fault() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let out = dir.path().join("out");
    let out_s = out.to_str().unwrap();
    let ok = run(&cache, &["oracle", "-q", "--out-dir", out_s]);
    assert_eq!(ok.status.code(), Some(0), "{}", text(&ok));
    assert!(data(&out.join("oracle.csv")).iter().skip(1).all(|r| r.contains(",pass,")));

    let bad = run(&cache, &["oracle", "-q", "--inject-fault", "4:2", "--out-dir", out_s]);
    assert_eq!(bad.status.code(), Some(3), "{}", text(&bad));
    assert!(text(&bad).contains("term 2 of order 4"), "{}", text(&bad));
}

#[test]
fn oracle_over_budget_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run(dir.path(), &["oracle", "-q", "--set", "oracle_sites=14", "--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4), "{}", text(&o));
}

#[test]
fn single_order_reports_missing_extrapolation() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run(dir.path(), &["exponents", "-q", "--orders", "2", "--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o));
    assert!(text(&o).contains("extrapolation unavailable"));
    let rows = data(&out.join("exponents.csv"));
    let inf: Vec<&String> = rows.iter().filter(|r| r.split(',').nth(2) == Some("inf")).collect();
    assert!(!inf.is_empty());
    assert!(inf.iter().all(|r| r.split(',').nth(3) == Some("")));
}

#[test]
fn potential_vanishes_at_origin() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run(dir.path(), &["potential", "-q", "--orders", "2,3", "--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o));
    let rows = data(&out.join("potential.csv"));
    let origin: Vec<&String> = rows.iter().filter(|r| r.split(',').nth(2) == Some("0")).collect();
    assert_eq!(origin.len(), 4);
    assert!(origin.iter().all(|r| r.split(',').nth(3) == Some("0")));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("potential.json")).unwrap()).unwrap();
    assert_eq!(json["data"]["landau"].as_array().unwrap().len(), 4);
    assert!(!json["provenance"]["cache_keys"].as_array().unwrap().is_empty());
}
