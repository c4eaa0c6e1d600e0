//! End-to-end tests against the compiled binary: exit codes, golden
//! fractions, determinism, and cache integrity.

use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_opdam"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.display().to_string()
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn epoly_reports_the_probability_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "a1.json",
        r#"{"system":"A1","k":["1/2"],"lambda":[-1]}"#,
    );
    let out = run(&["epoly", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(v["c"], "4/3");
    assert_eq!(v["prob"][0]["b"], "3/4");
    assert_eq!(v["prob"][1]["b"], "1/4");
    assert_eq!(v["verified"], true);

    // Same run in CSV form carries the same fractions.
    let csv = run(&["epoly", "--config", &cfg, "--format", "csv"]);
    assert_eq!(csv.status.code(), Some(0));
    let text = stdout_of(&csv);
    assert!(text.starts_with("weight,coeff,b\n"));
    assert!(text.contains("-1,1,3/4"));
    assert!(text.contains("1,1/3,1/4"));
}

#[test]
fn negative_multiplicity_is_rejected_as_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.json",
        r#"{"system":"A1","k":["-1/2"],"lambda":[1]}"#,
    );
    let out = run(&["epoly", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(v["error"]["kind"], "config");
}

#[test]
fn missing_config_is_a_configuration_error() {
    let out = run(&["epoly"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_config_field_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.json",
        r#"{"system":"A1","lambda":[1],"lamda":[2]}"#,
    );
    let out = run(&["epoly", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "lim.json",
        r#"{"system":"A2","k":["1"],"lambda":[1,0],"n_list":[1,2,4],"z_grid":[["1/4","1/4"]],"seed":11}"#,
    );
    let a = run(&["limit", "--config", &cfg]);
    let b = run(&["limit", "--config", &cfg]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn measure_emits_exact_orbit_fractions() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "m.json",
        r#"{"system":"A1","k":["1/2"],"lambda":[-1],"n_list":[1],"z_grid":[["1/2"]],"moments":[1]}"#,
    );
    let out = run(&["measure", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(v[0]["n"], 1);
    assert_eq!(v[0]["support_ok"], true);
    assert_eq!(v[0]["atoms"][0]["point"][0], "-1/2");
    assert_eq!(v[0]["atoms"][0]["weight"], "3/4");
    assert_eq!(v[0]["atoms"][1]["weight"], "1/4");
    assert_eq!(v[0]["moments"][0]["value"], "-1/2");
}

#[test]
fn limit_reports_overflow_rows_and_continues() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "lim.json",
        r#"{"system":"A1","k":["1/2"],"lambda":[1],"n_list":[1,4],"z_grid":[["1/2"]],"downset_limit":3,"moments":[1]}"#,
    );
    let out = run(&["limit", "--config", &cfg, "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    assert!(text.contains("downset overflow"));
    assert!(text.lines().any(|l| l.starts_with("1,") && !l.contains("overflow")));
}

#[test]
fn verify_default_suite_passes() {
    let out = run(&["verify", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    for check in ["positivity", "hull", "spectral-orbit", "intertwining", "rank-one-oracle"] {
        assert!(text.lines().any(|l| l.starts_with(check)), "missing {}", check);
    }
    assert!(!text.contains(",false,"));
}

#[test]
fn corrupted_cache_entry_fails_with_integrity_error() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let cfg = write_config(
        dir.path(),
        "c.json",
        &format!(
            r#"{{"system":"B2","k":["1/2","1"],"lambda":[1,1],"cache_dir":"{}"}}"#,
            cache.display()
        ),
    );
    let first = run(&["epoly", "--config", &cfg]);
    assert_eq!(first.status.code(), Some(0));

    // A warm hit reproduces the first output byte for byte.
    let second = run(&["epoly", "--config", &cfg]);
    assert_eq!(first.stdout, second.stdout);

    // Flip one digit inside the stored payload: the digest no longer matches.
    let entry = std::fs::read_dir(&cache)
        .unwrap()
        .next()
        .unwrap()
        .unwrap()
        .path();
    let text = std::fs::read_to_string(&entry).unwrap();
    std::fs::write(&entry, text.replace("\"1/", "\"7/")).unwrap();
    let third = run(&["epoly", "--config", &cfg]);
    assert_eq!(third.status.code(), Some(1));
    assert!(stdout_of(&third).contains("cache integrity"));

    // verify surfaces the same corruption.
    let vcfg = write_config(
        dir.path(),
        "v.json",
        &format!(
            r#"{{"system":"A1","cache_dir":"{}","verify_systems":["A1"]}}"#,
            cache.display()
        ),
    );
    let v = run(&["verify", "--config", &vcfg, "--format", "csv"]);
    assert_eq!(v.status.code(), Some(1));
    assert!(stdout_of(&v).contains("cache-integrity"));
}

#[test]
fn rankone_oracles_agree() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "r.json",
        r#"{"system":"A1","k":["1/2"],"lambda":[1],"n_list":[10,100]}"#,
    );
    let out = run(&["rankone", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(v["oracle_cases"], 17);
    assert_eq!(v["float_cases"], 80);

    // rankone on any other system is a configuration error.
    let cfg2 = write_config(dir.path(), "r2.json", r#"{"system":"B2","lambda":[1,0]}"#);
    let bad = run(&["rankone", "--config", &cfg2]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn intertwiner_dump_carries_known_rank_one_fractions() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "d.json",
        r#"{"system":"A1","k":["1/2"],"lambda":[0],"N":6}"#,
    );
    let out = run(&["dunkl-v", "--config", &cfg, "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    assert!(text.contains("1,1,1,1/2\n"));
    assert!(text.contains("3,3,3,3/8\n"));
    assert!(text.contains("5,5,5,5/16\n"));
}

#[test]
fn kernel_grid_values_match_the_limit_reference() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "e.json",
        r#"{"system":"A1","k":["1/2"],"lambda":[1],"z_grid":[["1/2"],["0"]]}"#,
    );
    let out = run(&["expw", "--config", &cfg, "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "z,re,im,tail");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let re: f64 = row[1].parse().unwrap();
    assert!((re - 1.8312249817).abs() < 1e-9);
    // Exp at the origin is exactly one.
    let origin: Vec<&str> = lines.next().unwrap().split(',').collect();
    let re0: f64 = origin[1].parse().unwrap();
    assert!((re0 - 1.0).abs() < 1e-30);
}

#[test]
fn out_flag_writes_the_file_instead_of_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "a1.json",
        r#"{"system":"A1","k":["1/2"],"lambda":[-1]}"#,
    );
    let target = dir.path().join("result.json");
    let out = run(&["epoly", "--config", &cfg, "--out", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout_of(&out).is_empty());
    let text = std::fs::read_to_string(&target).unwrap();
    assert!(text.contains("\"3/4\""));
}
