//! End-to-end checks of the `plab` binary: exit codes, report byte
//! stability, worker-count independence, witness replay, and the
//! homomorphism utilities.

use std::path::PathBuf;
use std::process::{Command, Output};

fn plab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn tmp(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("plab-cli-test-{}-{name}", std::process::id()));
    p
}

#[test]
fn unknown_suite_is_a_usage_error() {
    let out = plab(&["no-such-suite"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("unknown suite"));
    assert!(stderr.contains("clique-ext"));
}

#[test]
fn list_names_every_suite() {
    let out = plab(&["list"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    for suite in plab_cli::suites::SUITES {
        assert!(stdout.contains(suite), "missing {suite}");
    }
}

#[test]
fn reports_are_byte_stable_and_jobs_independent() {
    let cfg = tmp("shift-config.json");
    std::fs::write(&cfg, r#"{ "suite": "shift", "instances": 8, "seed": 42 }"#).unwrap();
    let out1 = tmp("report-1.json");
    let out2 = tmp("report-2.json");
    let out4 = tmp("report-4.json");
    let cfg_s = cfg.to_str().unwrap();
    assert_eq!(
        plab(&["shift", "--config", cfg_s, "--out", out1.to_str().unwrap()])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        plab(&["shift", "--config", cfg_s, "--out", out2.to_str().unwrap()])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        plab(&[
            "shift",
            "--config",
            cfg_s,
            "--jobs",
            "4",
            "--out",
            out4.to_str().unwrap()
        ])
        .status
        .code(),
        Some(0)
    );
    let b1 = std::fs::read(&out1).unwrap();
    assert_eq!(b1, std::fs::read(&out2).unwrap());
    assert_eq!(b1, std::fs::read(&out4).unwrap());
    // The report echoes the seed and carries no timing field.
    let text = String::from_utf8(b1).unwrap();
    assert!(text.contains("\"seed\": 42"));
    assert!(!text.contains("elapsed"));
}

#[test]
fn seed_flag_changes_report_bytes() {
    let out_a = tmp("seed-a.json");
    let out_b = tmp("seed-b.json");
    plab(&["gamma-phi", "--seed", "1", "--out", out_a.to_str().unwrap()]);
    plab(&["gamma-phi", "--seed", "2", "--out", out_b.to_str().unwrap()]);
    assert_ne!(std::fs::read(&out_a).unwrap(), std::fs::read(&out_b).unwrap());
}

#[test]
fn witness_replay_runs_a_single_check() {
    let wit = tmp("witness.json");
    std::fs::write(
        &wit,
        r#"{
  "suite": "clique-ext",
  "check": "clique-ext/replayed",
  "payload": {
    "shape": { "components": [ {"pairs": 1, "isolated": 0}, {"pairs": 1, "isolated": 0} ] },
    "clique": [[0, 0], [0, 1], [1, 0]]
  }
}"#,
    )
    .unwrap();
    let out = plab(&["clique-ext", "--replay", wit.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("\"pass\": true"));

    // A witness for the wrong suite is a usage error.
    let out = plab(&["max-clique", "--replay", wit.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn seeded_witnesses_replay_across_suite_families() {
    // Numeric witnesses carry an instance seed; replaying one re-runs just
    // that instance deterministically.
    let wit = tmp("tangent-witness.json");
    std::fs::write(
        &wit,
        r#"{ "suite": "tangent-balls", "check": "tangent-balls/p=2",
             "payload": { "p": 2.0, "instance_seed": 12345, "directions": 64 } }"#,
    )
    .unwrap();
    let out = plab(&["tangent-balls", "--replay", wit.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("\"pass\": true"));

    let wit = tmp("shift-witness.json");
    std::fs::write(
        &wit,
        r#"{ "suite": "shift", "check": "shift/defect-conservation",
             "payload": { "instance_seed": 77 } }"#,
    )
    .unwrap();
    let out = plab(&["shift", "--replay", wit.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));

    let wit = tmp("roundtrip-witness.json");
    std::fs::write(
        &wit,
        r#"{ "suite": "factorize-roundtrip", "check": "factorize-roundtrip/n=2",
             "payload": { "n": 2, "instance_seed": 31415 } }"#,
    )
    .unwrap();
    let out = plab(&["factorize-roundtrip", "--replay", wit.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));

    let wit = tmp("ratscaling-witness.json");
    std::fs::write(
        &wit,
        r#"{ "suite": "rat-scaling", "check": "rat-scaling/segment",
             "payload": { "case": "segment" } }"#,
    )
    .unwrap();
    let out = plab(&["rat-scaling", "--replay", wit.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn malformed_config_is_a_usage_error() {
    let cfg = tmp("bad-config.json");
    std::fs::write(&cfg, "{ not json").unwrap();
    let out = plab(&["shift", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    // Config naming a different suite than the command.
    std::fs::write(&cfg, r#"{ "suite": "closure" }"#).unwrap();
    let out = plab(&["shift", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_and_factor_utilities() {
    let hom = tmp("hom.txt");
    std::fs::write(
        &hom,
        "shape: {\"components\":[{\"pairs\":1,\"isolated\":1}]}\n0 -> 1\n1 -> 0\n2 -> 2\n",
    )
    .unwrap();
    let out = plab(&["verify", "--hom", hom.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("VALID"));

    let fact_out = tmp("fact.txt");
    let out = plab(&[
        "factor",
        "--hom",
        hom.to_str().unwrap(),
        "--out",
        fact_out.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&fact_out).unwrap();
    assert_eq!(text, "sigma: 0\ng[0]: 1 0\n");

    // An edge-breaking map is reported as invalid with exit 1.
    std::fs::write(
        &hom,
        "shape: {\"components\":[{\"pairs\":1,\"isolated\":1}]}\n0 -> 2\n1 -> 1\n2 -> 0\n",
    )
    .unwrap();
    let out = plab(&["verify", "--hom", hom.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("INVALID"));

    // factor/verify without --hom is a usage error.
    let out = plab(&["factor"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn dump_files_are_written() {
    let samples = tmp("samples.txt");
    let cfg = tmp("gp.json");
    std::fs::write(&cfg, r#"{ "suite": "gamma-phi", "samples": 50 }"#).unwrap();
    let out = plab(&[
        "gamma-phi",
        "--config",
        cfg.to_str().unwrap(),
        "--dump-samples",
        samples.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&samples).unwrap();
    let first = text.lines().next().unwrap();
    // 17-significant-digit scientific notation, whitespace separated.
    for field in first.split_whitespace() {
        let v: f64 = field.parse().unwrap();
        assert_eq!(plab_cli::numeric_text::format_f64(v), field);
    }

    let derivations = tmp("derivations.txt");
    let out = plab(&[
        "closure",
        "--dump-derivations",
        derivations.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&derivations).unwrap();
    assert!(text.starts_with("0: seed()"));
    assert!(text.contains("scale("));
    assert!(text.contains("sum("));
}

#[test]
fn failing_suite_exits_one_with_witness() {
    // An adversarial tolerance forces gamma-phi to fail, which must yield
    // exit code 1 and a serialized witness in the report.
    let cfg = tmp("impossible.json");
    std::fs::write(
        &cfg,
        r#"{ "suite": "gamma-phi", "samples": 20, "tolerances": { "algebraic": 1e-30, "blockwise": 0.0 } }"#,
    )
    .unwrap();
    let report = tmp("failing-report.json");
    let out = plab(&[
        "gamma-phi",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let text = std::fs::read_to_string(&report).unwrap();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    let failed = value["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| !c["pass"].as_bool().unwrap())
        .count();
    assert!(failed > 0);
    for check in value["checks"].as_array().unwrap() {
        if !check["pass"].as_bool().unwrap() {
            assert!(check["witness"].is_object(), "failed check without witness");
        }
    }
}
