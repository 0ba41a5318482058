//! End-to-end tests of the command-line interface and its exit-code
//! contract: 0 success, 1 certification failure, 2 usage/capacity error.

use std::path::Path;
use std::process::{Command, Output};

fn karelu(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_karelu"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn build_reports_architecture_and_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = karelu(
        &["build", "--fn", "coord1", "--d", "2", "--K", "3", "--p", "2", "--out", "net.json"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("(9, (2,8,8,8,8,8,8,2,1,65,1))"), "{text}");
    assert!(text.contains("max_weight"));
    assert!(dir.path().join("net.json").exists());
}

#[test]
fn eval_matches_in_memory_network_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("net.json");
    let out = karelu(
        &["build", "--fn", "coord1", "--d", "2", "--K", "6", "--p", "2",
          "--out", path.to_str().unwrap()],
        dir.path(),
    );
    assert!(out.status.success());

    let out = karelu(
        &["eval", "--net", path.to_str().unwrap(), "--point", "0.3,0.3"],
        dir.path(),
    );
    assert!(out.status.success());
    let printed: f64 = stdout(&out).trim().parse().unwrap();

    let (net, _) = karelu::relunet::load_network(&path).unwrap();
    let expected = net.eval_scalar(&[0.3, 0.3]).unwrap();
    assert_eq!(printed.to_bits(), expected.to_bits());

    // (0.3, 0.3) avoids every ramp ambiguity at K=6, so the network agrees
    // with the truncated KA formula.
    let f = karelu::registry::get("coord1", 2, 0).unwrap();
    let formula = karelu::outer::ka_approx_eval(&f, &[0.3, 0.3], 6).unwrap();
    assert!((printed - formula).abs() <= 1e-8);
}

#[test]
fn verify_sweep_passes_and_appends_deterministic_csv() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = karelu(
            &["verify", "--fn", "coord1", "--d", "2", "--K-range", "3..5", "--p", "2",
              "--out", name],
            dir.path(),
        );
        assert!(out.status.success(), "{}", stdout(&out));
        let text = stdout(&out);
        assert!(text.contains("PASS lp_error"));
        assert!(text.contains("PASS rate_fit"));
        assert!(text.contains("all certifications passed"));
        std::fs::read(dir.path().join(name)).unwrap()
    };
    let first = run("a.csv");
    let second = run("b.csv");
    assert_eq!(first, second, "identical configs must emit identical bytes");
    let text = String::from_utf8(first).unwrap();
    assert!(text.starts_with("function,d,K,p,beta,Q,measured_lp,bound,max_weight,bad_set_measure,grid_bits"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn verify_detects_corrupted_network_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("net.json");
    let out = karelu(
        &["build", "--fn", "sines", "--d", "2", "--K", "3", "--p", "2",
          "--out", path.to_str().unwrap()],
        dir.path(),
    );
    assert!(out.status.success());

    let mut value: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    value["layers"][2]["bias"][1] = serde_json::json!(-127.25);
    std::fs::write(&path, serde_json::to_string_pretty(&value).unwrap()).unwrap();

    let out = karelu(&["verify", "--net", path.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(1), "{}", stdout(&out));
    assert!(stdout(&out).contains("FAIL authenticity"));
}

#[test]
fn verify_accepts_authentic_network_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("net.json");
    karelu(
        &["build", "--fn", "product", "--d", "2", "--K", "3", "--p", "1",
          "--out", path.to_str().unwrap()],
        dir.path(),
    );
    let out = karelu(&["verify", "--net", path.to_str().unwrap()], dir.path());
    assert!(out.status.success(), "{}", stdout(&out));
    assert!(stdout(&out).contains("PASS authenticity"));
}

#[test]
fn capacity_and_usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = karelu(
        &["build", "--fn", "coord1", "--d", "3", "--K", "40", "--p", "2", "--out", "x.json"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("x.json").exists());

    let out = karelu(
        &["build", "--fn", "unknown", "--d", "2", "--K", "3", "--out", "x.json"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));

    let out = karelu(&["verify", "--fn", "coord1"], dir.path());
    assert_eq!(out.status.code(), Some(2), "verify without K must be a usage error");

    let out = karelu(&["eval", "--net", "missing.json", "--point", "0.5"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn eval_rejects_dimension_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("net.json");
    karelu(
        &["build", "--fn", "coord1", "--d", "2", "--K", "2", "--p", "2",
          "--out", path.to_str().unwrap()],
        dir.path(),
    );
    let out = karelu(
        &["eval", "--net", path.to_str().unwrap(), "--point", "0.5"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn seeded_tables_verify_and_build_constant_nets() {
    let dir = tempfile::tempdir().unwrap();
    let out = karelu(
        &["verify", "--fn", "pwc2", "--d", "2", "--K", "4", "--p", "2", "--seed", "7"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stdout(&out));
}

#[test]
fn json_report_format_and_grid_bits() {
    let dir = tempfile::tempdir().unwrap();
    let out = karelu(
        &["verify", "--fn", "sines", "--d", "2", "--K", "4", "--p", "1",
          "--grid-bits", "7", "--format", "json", "--out", "report.json"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stdout(&out));
    let text = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    let rows: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 1);
    assert_eq!(rows[0]["function"], "sines");
    assert_eq!(rows[0]["grid_bits"], 7);
    assert!(rows[0]["measured_lp"].as_f64().unwrap() <= rows[0]["bound"].as_f64().unwrap());
}
