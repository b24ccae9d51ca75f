use std::process::Command;

use rademacher_cli::{run, Outcome, EXIT_INVALID_SPEC, EXIT_IO, EXIT_NO_POLAR_PART, EXIT_OK};

fn go(args: &str) -> Outcome {
    run(std::iter::once("rademacher").chain(args.split_whitespace()))
}

fn line<'a>(o: &'a Outcome, key: &str) -> Option<&'a str> {
    o.stdout.lines().find_map(|l| l.strip_prefix(key)).map(str::trim)
}

#[test]
fn coeff_partition_hundred() {
    let o = go("coeff --eta -1 -n 100 --target 0.25");
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    assert_eq!(line(&o, "snapped:"), Some("190569292"));
    assert!(line(&o, "bound:").is_some());
}

#[test]
fn coeff_partition_zero() {
    let o = go("coeff --eta -1 -n 0");
    assert_eq!(o.code, EXIT_OK);
    assert_eq!(line(&o, "snapped:"), Some("1"));
}

#[test]
fn coeff_j_prints_bound_without_snapping() {
    let o = go("coeff --j -n 2");
    assert_eq!(o.code, EXIT_OK);
    assert!(o.stdout.contains("196884"));
    let bound: f64 = line(&o, "bound:").unwrap().parse().unwrap();
    assert!(bound >= 0.5);
    assert!(line(&o, "snapped:").is_none());
}

#[test]
fn snapped_line_only_below_half() {
    for args in ["coeff --eta -1 -n 50 --target 0.9", "coeff --eta -3 -n 10 --target 0.49", "coeff --j -n 30"] {
        let o = go(args);
        assert_eq!(o.code, EXIT_OK);
        let bound: f64 = line(&o, "bound:").unwrap().parse().unwrap();
        assert_eq!(line(&o, "snapped:").is_some(), bound < 0.5, "{args}");
    }
}

#[test]
fn coeff_json_has_breakdown() {
    let o = go("coeff --eta -25 -n 12 --json");
    assert_eq!(o.code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&o.stdout).unwrap();
    let parts = v["breakdown"].as_array().unwrap();
    let sum: f64 = parts.iter().map(|p| p[1].as_f64().unwrap()).sum();
    assert!(sum <= v["bound"].as_f64().unwrap() * (1.0 + 1e-12));
    assert_eq!(v["snapped"], v["oracle"]);
}

#[test]
fn fixed_cutoff_is_respected() {
    let o = go("coeff --eta -1 -n 30 --cutoff 4 --target 1e9");
    assert_eq!(o.code, EXIT_OK);
    assert_eq!(line(&o, "cutoff:"), Some("4"));
}

#[test]
fn unreachable_target_and_bad_input() {
    assert_eq!(go("coeff --eta 0 -n 3").code, EXIT_INVALID_SPEC);
    assert_eq!(go("coeff -n 3").code, EXIT_INVALID_SPEC);
    assert_eq!(go("coeff --eta -1 -n -2").code, EXIT_INVALID_SPEC);
    assert_eq!(go("coeff --eta -1 -n 5 --target -1").code, EXIT_INVALID_SPEC);
    assert_eq!(go("coeff --spec /nonexistent/spec.toml -n 1").code, EXIT_IO);
}

#[test]
fn certify_examples() {
    let o = go("certify --eta -1");
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    assert!(line(&o, "lambda0:").is_some());
    assert!(o.stdout.contains("verified n in [0, "));
    let o = go("certify --eta 1");
    assert_eq!(o.code, EXIT_NO_POLAR_PART);
    assert!(o.stderr.contains("polar part"));
    let o = go("certify --j");
    assert_eq!(o.code, EXIT_OK);
    assert!(o.stdout.contains("all non-zero"));
}

#[test]
fn spec_documents() {
    let dir = tempfile::tempdir().unwrap();
    let toml_path = dir.path().join("eta.toml");
    std::fs::write(&toml_path, "eta_exponent = -1\ntarget_abs_err = 0.25\nprecision_bits = 96\n").unwrap();
    let o = go(&format!("coeff --spec {} -n 20", toml_path.display()));
    assert_eq!(line(&o, "snapped:"), Some("627"));
    let json_path = dir.path().join("j.json");
    std::fs::write(&json_path, r#"{"j_power": 1, "truncation": 4}"#).unwrap();
    let o = go(&format!("oracle --spec {}", json_path.display()));
    assert_eq!(o.code, EXIT_OK);
    assert!(o.stdout.contains("196884"));
    assert!(o.stdout.contains("21493760"));
    assert!(!o.stdout.contains("864299970"));
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "eta_exponent = 0\n").unwrap();
    assert_eq!(go(&format!("coeff --spec {} -n 1", bad.display())).code, EXIT_INVALID_SPEC);
    std::fs::write(&bad, "eta_exponent = -1\ncolour = 3\n").unwrap();
    assert_eq!(go(&format!("coeff --spec {} -n 1", bad.display())).code, EXIT_INVALID_SPEC);
}

#[test]
fn density_csv() {
    let o = go("density --eta 1 --cuts 1000,10000");
    assert_eq!(o.code, EXIT_OK);
    let rows: Vec<&str> = o.stdout.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "x,count,density");
    assert_eq!(rows.len(), 3);
    let o = go("density --eta -1 --cuts 10,100 --certify");
    assert!(o.stdout.contains("certified-non-lacunary"), "{}", o.stdout);
    assert!(o.stdout.contains("100,101,"));
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.csv");
    let o = go(&format!("density --eta 24 --cuts 50 -o {}", out.display()));
    assert_eq!(o.code, EXIT_OK);
    assert!(std::fs::read_to_string(out).unwrap().contains("50,50,"));
}

#[test]
fn ford_svg() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.svg");
    let o = go(&format!("ford -N 5 -o {}", out.display()));
    assert_eq!(o.code, EXIT_OK);
    let svg = std::fs::read_to_string(out).unwrap();
    assert_eq!(svg.matches("<circle").count(), 11);
    assert!(svg.starts_with("<?xml") || svg.starts_with("<svg"));
    assert_eq!(go("ford -N 0").code, EXIT_INVALID_SPEC);
}

#[test]
fn oracle_partition() {
    assert_eq!(go("oracle --partition 5").stdout.trim(), "7");
    assert_eq!(go("oracle --partition 0").stdout.trim(), "1");
}

#[test]
fn threads_do_not_change_output() {
    let a = go("coeff --eta -25 -n 77 --threads 1");
    let b = go("coeff --eta -25 -n 77 --threads 3");
    let c = go("coeff --eta -25 -n 77");
    assert_eq!(a, b);
    assert_eq!(a, c);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_rademacher");
    let out = Command::new(bin).args(["coeff", "--eta", "-1", "-n", "100"]).output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("snapped: 190569292"));
    let out = Command::new(bin).args(["certify", "--eta", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_NO_POLAR_PART));
    let out = Command::new(bin).args(["coeff", "--eta", "-1", "-n", "3"]).env("CM_PRECISION_BITS", "abc").output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_INVALID_SPEC));
    let out = Command::new(bin).args(["coeff", "--eta", "-1", "-n", "3"]).env("CM_PRECISION_BITS", "200").output().unwrap();
    assert!(String::from_utf8_lossy(&out.stdout).contains("snapped: 3"));
}
