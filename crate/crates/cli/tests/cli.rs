//! End-to-end CLI behavior: exit codes, format equivalence, determinism,
//! cache reuse.

use std::path::Path;
use std::process::Command;

fn run_cli(cache: &Path, args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_hlav"))
        .args(args)
        .env("HLAV_CACHE_DIR", cache)
        .output()
        .expect("spawn hlav");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn unknown_flag_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, stderr) = run_cli(dir.path(), &["--bogus"]);
    assert_eq!(code, 2);
    assert!(!stderr.is_empty(), "diagnostics go to stderr");
}

#[test]
fn help_exits_zero_for_every_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, _) = run_cli(dir.path(), &["--help"]);
    assert_eq!(code, 0);
    for sub in [
        "sieve",
        "paircount",
        "tuplecount",
        "constants",
        "gallagher",
        "verify",
        "scan",
    ] {
        let (code, stdout, _) = run_cli(dir.path(), &[sub, "--help"]);
        assert_eq!(code, 0, "{sub} --help");
        assert!(stdout.contains("Usage"), "{sub} --help prints usage");
    }
}

#[test]
fn missing_required_flags_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["sieve"],
        vec!["verify", "thm2", "--x", "1000"],
        vec!["verify", "thm4", "--x", "1000"],
        vec!["verify", "lemma1", "--x", "1000"],
        vec!["constants"],
        vec!["gallagher", "--weighted"],
        vec!["gallagher"],
    ] {
        let (code, _, stderr) = run_cli(dir.path(), &args);
        assert_eq!(code, 2, "args {args:?}: {stderr}");
    }
}

#[test]
fn precondition_violations_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, stderr) = run_cli(
        dir.path(),
        &["verify", "thm2", "--x", "1000000", "--C", "0.5"],
    );
    assert_eq!(code, 2);
    assert!(stderr.contains("C > 1/2"), "{stderr}");

    let (code, _, _) = run_cli(dir.path(), &["paircount", "--x", "30", "--max-shift", "5"]);
    assert_eq!(code, 2, "odd max shift");

    let (code, _, stderr) = run_cli(
        dir.path(),
        &["paircount", "--x", "30", "--max-shift", "6", "--limit", "20"],
    );
    assert_eq!(code, 2, "limit below requirement: {stderr}");
}

#[test]
fn failed_pass_flag_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, _) = run_cli(
        dir.path(),
        &[
            "verify",
            "thm1",
            "--x",
            "10000",
            "--ratio-band",
            "0.99,1.01",
        ],
    );
    assert_eq!(code, 1);
    assert!(stdout.contains("false"));
}

#[test]
fn io_failure_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, stderr) = run_cli(
        dir.path(),
        &["sieve", "--limit", "100", "--out", "/nonexistent/dir/pb.hlpb"],
    );
    assert_eq!(code, 3, "{stderr}");
}

#[test]
fn csv_and_json_are_value_equivalent() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["paircount", "--x", "100", "--max-shift", "10"];
    let (code, csv_text, _) = run_cli(dir.path(), &args);
    assert_eq!(code, 0);
    let mut with_json: Vec<&str> = args.to_vec();
    with_json.extend(["--format", "json"]);
    let (code, json_text, _) = run_cli(dir.path(), &with_json);
    assert_eq!(code, 0);

    let mut reader = csv::Reader::from_reader(csv_text.as_bytes());
    let csv_rows: Vec<(u64, u64, f64)> = reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            (
                r[0].parse().unwrap(),
                r[1].parse().unwrap(),
                r[2].parse().unwrap(),
            )
        })
        .collect();
    let json_rows: Vec<(u64, u64, f64)> = json_text
        .lines()
        .map(|line| {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            (
                v["shift"].as_u64().unwrap(),
                v["count"].as_u64().unwrap(),
                v["prediction"].as_f64().unwrap(),
            )
        })
        .collect();
    assert_eq!(csv_rows.len(), 5);
    assert_eq!(csv_rows, json_rows);

    // Same property for a verification report: the CSV numerics re-parse to
    // the exact JSON values.
    let args = ["verify", "thm2", "--x", "50000", "--C", "1.0"];
    let (_, csv_text, _) = run_cli(dir.path(), &args);
    let mut with_json: Vec<&str> = args.to_vec();
    with_json.extend(["--format", "json"]);
    let (_, json_text, _) = run_cli(dir.path(), &with_json);
    let mut reader = csv::Reader::from_reader(csv_text.as_bytes());
    let record = reader.records().next().unwrap().unwrap();
    let v: serde_json::Value = serde_json::from_str(json_text.trim()).unwrap();
    assert_eq!(record[0].to_string(), v["statement_id"].as_str().unwrap());
    for (idx, key) in [(3, "lhs"), (4, "rhs"), (5, "ratio"), (6, "margin")] {
        let from_csv: f64 = record[idx].parse().unwrap();
        assert_eq!(from_csv, v[key].as_f64().unwrap(), "{key}");
    }
}

#[test]
fn output_is_deterministic_across_cache_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["verify", "thm1", "--x", "100000", "--theta", "0.62"];
    // First run sieves and populates the cache, second run loads it, third
    // run constrains the thread pool; bytes must be identical throughout.
    let (code, first, _) = run_cli(dir.path(), &args);
    assert_eq!(code, 0);
    assert!(
        dir.path().read_dir().unwrap().count() >= 2,
        "cache holds a bitmap and the report log"
    );
    let (_, second, _) = run_cli(dir.path(), &args);
    let mut single_thread: Vec<&str> = args.to_vec();
    single_thread.extend(["--threads", "1"]);
    let (_, third, _) = run_cli(dir.path(), &single_thread);
    assert_eq!(first, second);
    assert_eq!(first, third);
}

#[test]
fn verify_reports_are_appended_to_the_log() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["verify", "thm2", "--x", "100000", "--C", "1.0"];
    run_cli(dir.path(), &args);
    run_cli(dir.path(), &args);
    let log = std::fs::read_to_string(dir.path().join("reports.jsonl")).unwrap();
    assert_eq!(log.lines().count(), 2);
    for line in log.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["statement_id"], "THM2_WEIGHTED");
        for key in ["x", "params", "lhs", "rhs", "ratio", "margin", "pass", "notes"] {
            assert!(v.get(key).is_some(), "missing key {key}");
        }
    }
}

#[test]
fn scan_emits_monotone_grid() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, _) = run_cli(
        dir.path(),
        &["scan", "--x-grid", "1e5,1e4,5e4", "--E-rule", "log2"],
    );
    assert_eq!(code, 0);
    let mut reader = csv::Reader::from_reader(stdout.as_bytes());
    let xs: Vec<u64> = reader
        .records()
        .map(|r| r.unwrap()[1].parse().unwrap())
        .collect();
    assert_eq!(xs, vec![10_000, 50_000, 100_000]);

    let (code, _, stderr) = run_cli(dir.path(), &["scan", "--x-grid", "1e4", "--E-rule", "bogus"]);
    assert_eq!(code, 2, "{stderr}");

    // Empty grid: header line only in CSV, empty JSON.
    let (code, stdout, _) = run_cli(dir.path(), &["scan"]);
    assert_eq!(code, 0);
    assert_eq!(stdout, "statement_id,x,params,lhs,rhs,ratio,margin,pass,notes\n");
    let (code, stdout, _) = run_cli(dir.path(), &["scan", "--format", "json"]);
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
}

#[test]
fn stride_and_lemma1_run_via_cli() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, stderr) = run_cli(
        dir.path(),
        &["verify", "thm4", "--x", "100000", "--m", "5", "--h", "500"],
    );
    assert_eq!(code, 0, "{stderr}");
    assert!(stdout.contains("THM4_STRIDE"));
    assert!(stdout.contains("cor3_lhs="));

    let (code, stdout, stderr) = run_cli(
        dir.path(),
        &["verify", "lemma1", "--x", "10000", "--B", "2,4,8"],
    );
    assert_eq!(code, 0, "{stderr}");
    assert!(stdout.contains("LEMMA1"));

    let (code, stdout, _) = run_cli(
        dir.path(),
        &["verify", "thm3", "--x", "100000", "--C", "1.0"],
    );
    assert!(code == 0 || code == 1, "thm3 margin carries no sign guarantee");
    assert!(stdout.contains("THM3_KTUPLE"));
}

#[test]
fn sieve_reports_prime_count() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("primes.hlpb");
    let (code, stdout, _) = run_cli(
        dir.path(),
        &["sieve", "--limit", "1e6", "--out", out_path.to_str().unwrap()],
    );
    assert_eq!(code, 0);
    assert!(stdout.contains("1000000,78498,"));
    assert!(out_path.exists());
}
