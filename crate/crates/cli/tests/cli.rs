use std::process::{Command, Output};

use harmonia_core::report::{parse_csv, parse_jsonl, CSV_HEADER};

fn harmonia(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_harmonia"))
        .args(args)
        .env_remove("HARMONIA_JOBS")
        .output()
        .expect("spawn harmonia")
}

fn code(args: &[&str]) -> i32 {
    harmonia(args).status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["verify", "--prime", "7"]), 0);
    assert_eq!(code(&["verify", "--prime", "9"]), 2);
    assert_eq!(code(&["verify", "--prime", "5"]), 2);
    assert_eq!(
        code(&["verify", "--prime", "5", "--checks", "wolstenholme_h1"]),
        0
    );
    assert_eq!(code(&["verify", "--prime", "7", "--checks", "nope"]), 2);
    assert_eq!(code(&["verify", "--prime", "7", "--format", "xml"]), 2);
    assert_eq!(code(&["scan", "--from", "100", "--to", "7"]), 2);
    assert_eq!(code(&["scan", "--from", "5", "--to", "20"]), 2);
    assert_eq!(
        code(&["scan", "--from", "7", "--to", "20", "--jobs", "0"]),
        2
    );
    assert_eq!(code(&["oracle", "--max-prime", "500"]), 2);
    assert_eq!(code(&["bench", "--prime", "10"]), 2);
    assert_eq!(code(&["frobnicate"]), 2);
    assert_eq!(code(&["--help"]), 0);
}

#[test]
fn verify_table_summary() {
    let o = harmonia(&["verify", "--prime", "7"]);
    assert!(stdout(&o).ends_with("20/20 checks pass at p = 7\n"));
}

#[test]
fn verify_jsonl_selected_checks_keep_order() {
    let o = harmonia(&[
        "verify",
        "--prime",
        "11",
        "--checks",
        "eq16,h2_mod_p",
        "--format",
        "jsonl",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let recs = parse_jsonl(&stdout(&o)).unwrap();
    let ids: Vec<_> = recs.iter().map(|r| r.check.as_str()).collect();
    assert_eq!(ids, ["eq16", "h2_mod_p"]);
    assert_eq!(recs[0].modulus, 121);
    assert_eq!(recs[1].modulus, 11);
    assert!(recs
        .iter()
        .all(|r| r.pass && r.residual == 0 && r.prime == 11));
}

#[test]
fn verify_csv_header_and_rows() {
    let o = harmonia(&["verify", "--prime", "13", "--format", "csv"]);
    let text = stdout(&o);
    assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
    assert_eq!(parse_csv(&text).unwrap().len(), 20);
}

#[test]
fn scan_to_file_is_ordered_and_job_independent() {
    let dir = tempfile::tempdir().unwrap();
    let mut texts = Vec::new();
    for jobs in ["1", "3"] {
        let path = dir.path().join(format!("scan{jobs}.jsonl"));
        let o = harmonia(&[
            "scan",
            "--from",
            "7",
            "--to",
            "400",
            "--jobs",
            jobs,
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
        assert!(o.stdout.is_empty());
        texts.push(std::fs::read_to_string(&path).unwrap());
    }
    let strip = |t: &str| -> Vec<String> {
        parse_jsonl(t)
            .unwrap()
            .into_iter()
            .map(|mut r| {
                r.elapsed_ns = 0;
                serde_json::to_string(&r).unwrap()
            })
            .collect()
    };
    let a = strip(&texts[0]);
    assert_eq!(a, strip(&texts[1]));
    let recs = parse_jsonl(&texts[0]).unwrap();
    assert_eq!(recs.len(), 20 * harmonia_core::primes_in(7, 400).len());
    assert!(recs.windows(2).all(|w| w[0].prime <= w[1].prime));
    assert!(recs.iter().all(|r| r.pass));
}

#[test]
fn scan_reads_jobs_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_harmonia"))
        .args(["scan", "--from", "7", "--to", "50"])
        .env("HARMONIA_JOBS", "2")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("on 2 jobs"));
    assert_eq!(parse_jsonl(&stdout(&o)).unwrap().len(), 20 * 12);
}

#[test]
fn oracle_small_bound() {
    let o = harmonia(&["oracle", "--max-prime", "31"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("p = 31: 20/20 fields equal"));
    assert!(text.ends_with("oracle: 8 primes compared, 0 mismatching fields\n"));
}

#[test]
fn bench_reports_one_json_line() {
    let o = harmonia(&["bench", "--prime", "10007"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["prime"], 10007);
    assert_eq!(v["checks"], 20);
    assert_eq!(v["passed"], 20);
    assert!(v["total_ns"].as_u64().unwrap() >= v["profile_ns"].as_u64().unwrap());
}
