use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sigma-lab")).args(args).env_remove("SIGMA_LAB_CACHE").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn sigma_iterate_prints_trace() {
    let o = run(&["sigma", "6", "--iterate", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let values: Vec<&str> = text.lines().filter_map(|l| l.split_whitespace().nth(1)).collect();
    assert_eq!(values, ["6", "12", "28"], "{text}");
}

#[test]
fn sigma_power_sum() {
    let o = run(&["sigma", "6", "--power", "2", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("\"50\""), "{}", stdout(&o));
}

#[test]
fn factor_json_lines_are_parseable() {
    let o = run(&["factor", "12", "16105", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let lines: Vec<serde_json::Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 2);
}

#[test]
fn lprime_finds_only_six() {
    let o = run(&["lprime", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let ns: Vec<String> = stdout(&o).lines().skip(1).map(|l| l.split(',').next().unwrap().to_string()).collect();
    assert_eq!(ns, ["6"]);
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(run(&["no-such-command"]).status.code(), Some(64));
    assert_eq!(run(&["sigma", "0"]).status.code(), Some(64));
    assert_eq!(run(&["ctr-scan", "--from", "1", "--to", "5"]).status.code(), Some(64));
    assert_eq!(run(&["verify-all", "--claim", "no-such-claim"]).status.code(), Some(64));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn horizon_shortfall_exits_2() {
    let o = run(&["ctr-scan", "--from", "60", "--to", "70", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("67,,NO_K_WITHIN_HORIZON"));
}

#[test]
fn tiny_budget_is_unresolved_not_wrong() {
    let o = run(&["verify-all", "--claim", "cyclotomic-factors", "--budget-work", "10", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("UNRESOLVED"));
}

#[test]
fn verify_all_claim_filter() {
    let o = run(&["verify-all", "--claim", "powersum-congruence", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let lines: Vec<serde_json::Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 1);
    assert_eq!(lines[0]["id"], "powersum-congruence");
    assert_eq!(lines[0]["status"], "PASS");
}

#[test]
fn out_file_receives_data() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scan.csv");
    let o = run(&["ctr-scan", "--to", "12", "--format", "csv", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let body = std::fs::read_to_string(&path).unwrap();
    assert!(body.starts_with("n,smallest_k,status\n2,2,RESOLVED\n"));
}

#[test]
fn unwritable_out_exits_74() {
    let o = run(&["factor", "12", "--out", "/nonexistent-dir/x.txt"]);
    assert_eq!(o.status.code(), Some(74));
}

#[test]
fn cache_file_via_flag_and_env_gives_same_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("factors.cache");
    let args = ["sigma", "2305843009213693951", "--iterate", "3", "--format", "csv"];
    let plain = run(&args);
    let mut with_flag = args.to_vec();
    with_flag.extend(["--cache", path.to_str().unwrap()]);
    let first = run(&with_flag);
    assert!(path.exists());
    let second =
        Command::new(env!("CARGO_BIN_EXE_sigma-lab")).args(args).env("SIGMA_LAB_CACHE", &path).output().unwrap();
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(stdout(&plain), stdout(&first));
    assert_eq!(stdout(&first), stdout(&second));
}

#[test]
fn aliquot_detects_amicable_pair() {
    let o = run(&["aliquot", "220", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("284"));
}
