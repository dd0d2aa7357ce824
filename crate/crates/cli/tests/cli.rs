//! End-to-end tests of the `ztdn` binary: argument handling, exit codes,
//! and output framing. Deeper semantic checks live in the library crates;
//! here the subject is the command-line surface itself.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn ztdn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ztdn"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

fn exit(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn scenario_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn scenario(name: &str) -> String {
    scenario_path(name).to_str().expect("utf-8 path").to_string()
}

#[test]
fn reference_scenario_prints_one_verdict_per_network() {
    let out = ztdn(&["simulate", &scenario("three-networks.toml")]);
    assert_eq!(exit(&out), 0, "stderr: {}", stderr(&out));
    assert_eq!(stdout(&out), "net1 Grant, net2 Deny, net3 Deny\n");
}

#[test]
fn malformed_toml_fails_with_usage_exit_and_a_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.toml");
    std::fs::write(&path, "seed = [oops\n").unwrap();
    let out = ztdn(&["simulate", path.to_str().unwrap()]);
    assert_eq!(exit(&out), 2);
    assert!(stderr(&out).contains("line 1"), "stderr: {}", stderr(&out));
    assert!(stdout(&out).is_empty());
}

#[test]
fn invalid_scenario_reports_every_violation_at_once() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("invalid.toml");
    // Two independent problems: a network without an enforcement point and
    // an event referencing an undeclared user.
    std::fs::write(
        &path,
        r#"
[[network]]
id = "n1"
trust_threshold = 0.5
segments = ["s1"]

[[resource]]
id = "r1"
segment = "s1"
network = "n1"

[[event]]
at = 0
kind = "request"
user = "ghost"
network = "n1"
resource = "r1"
"#,
    )
    .unwrap();
    let out = ztdn(&["simulate", path.to_str().unwrap()]);
    assert_eq!(exit(&out), 2);
    let err = stderr(&out);
    assert!(err.contains("problems"), "stderr: {err}");
    assert!(err.matches("\n  - ").count() >= 2, "expected both violations listed: {err}");
}

#[test]
fn missing_scenario_file_is_a_usage_error() {
    let out = ztdn(&["simulate", "/nonexistent/nowhere.toml"]);
    assert_eq!(exit(&out), 2);
    assert!(stderr(&out).contains("cannot read"));
}

#[test]
fn seed_override_shows_up_in_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let out = ztdn(&[
        "simulate",
        &scenario("three-networks.toml"),
        "--seed",
        "123",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(exit(&out), 0);
    let json = std::fs::read_to_string(&report).unwrap();
    assert!(json.contains("\"seed\": 123"), "report: {}", &json[..200.min(json.len())]);
}

#[test]
fn repeated_simulations_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let scenario = scenario("flood-demo.toml");
    let first = ztdn(&["simulate", &scenario, "--out", a.to_str().unwrap(), "--json"]);
    let second = ztdn(&["simulate", &scenario, "--out", b.to_str().unwrap(), "--json"]);
    assert_eq!(exit(&first), 0);
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn verify_reports_holds_with_exit_zero() {
    let out = ztdn(&["verify", "builtin:ztdn"]);
    assert_eq!(exit(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("deadlock: holds"));
    assert!(text.contains("tamper-safety: holds"));
    assert!(text.contains("reauth-reachable: holds"));
}

#[test]
fn verify_reports_violations_with_exit_one_and_a_witness() {
    let out = ztdn(&["verify", "builtin:ztdn-tamper"]);
    assert_eq!(exit(&out), 1);
    let text = stdout(&out);
    assert!(text.contains("tamper-safety: violated"));
    assert!(text.contains("witness ("));
    assert!(text.contains("decision_grant!"), "witness should show the granting handshake");
}

#[test]
fn verify_query_filter_selects_a_single_query() {
    let out = ztdn(&["verify", "builtin:ztdn-tamper", "--query", "deadlock"]);
    assert_eq!(exit(&out), 0, "the deadlock query alone holds");
    assert_eq!(stdout(&out).lines().count(), 1);

    let missing = ztdn(&["verify", "builtin:ztdn", "--query", "nothing"]);
    assert_eq!(exit(&missing), 2);
    assert!(stderr(&missing).contains("no query named"));
}

#[test]
fn verify_state_budget_exhaustion_exits_three() {
    let out = ztdn(&["verify", "builtin:ztdn", "--max-states", "10"]);
    assert_eq!(exit(&out), 3);
    assert!(stdout(&out).contains("state bound hit"));
}

#[test]
fn verify_unknown_builtin_lists_the_available_models() {
    let out = ztdn(&["verify", "builtin:nope"]);
    assert_eq!(exit(&out), 2);
    assert!(stderr(&out).contains("ztdn, ztdn-tamper"));
}

#[test]
fn verify_reads_model_files_from_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pair.ta");
    std::fs::write(
        &path,
        "\
system pair
channel go
automaton a
init A0
edge A0 A1 sync go!
automaton b
init B0
edge B0 B1 sync go?
query done reachable a @ A1 && b @ B1
",
    )
    .unwrap();
    let out = ztdn(&["verify", path.to_str().unwrap()]);
    assert_eq!(exit(&out), 0, "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("done: holds"));

    std::fs::write(&path, "system broken\nautomaton a\nedge A B guard x > 1\n").unwrap();
    let bad = ztdn(&["verify", path.to_str().unwrap()]);
    assert_eq!(exit(&bad), 2);
    assert!(stderr(&bad).contains("line 3"), "stderr: {}", stderr(&bad));
}

#[test]
fn bench_writes_csv_and_report_summarizes_it() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("samples.csv");
    let out = ztdn(&["bench", "--out", csv.to_str().unwrap()]);
    assert_eq!(exit(&out), 0, "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("450 samples"));

    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 451, "header plus 450 rows");
    assert_eq!(text.lines().next().unwrap(), "task_group,run,request,policy_check_us,round_trip_us");

    let table = ztdn(&["report", csv.to_str().unwrap()]);
    assert_eq!(exit(&table), 0);
    let rendered = stdout(&table);
    for group in ["search_and_count", "company_names", "officers"] {
        assert!(rendered.contains(group), "missing {group} in:\n{rendered}");
    }

    let json = ztdn(&["report", csv.to_str().unwrap(), "--format", "json"]);
    assert_eq!(exit(&json), 0);
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&json)).expect("valid json");
    assert_eq!(parsed.as_array().map(|a| a.len()), Some(3));
}

#[test]
fn bench_without_out_streams_csv_to_stdout() {
    let out = ztdn(&["bench", "--runs", "1", "--requests", "2"]);
    assert_eq!(exit(&out), 0);
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 1 + 3 * 2, "header plus groups x requests");
    assert!(text.starts_with("task_group,run,request,"));
}

#[test]
fn bench_denies_the_unprivileged_role_entirely() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("denied.csv");
    let out = ztdn(&["bench", "--role", "user", "--out", csv.to_str().unwrap()]);
    assert_eq!(exit(&out), 0);
    let line = stdout(&out);
    assert!(line.contains("0 grants"), "got: {line}");
    assert!(line.contains("450 denials"), "got: {line}");
    assert!(line.contains("0 task executions"), "got: {line}");
}

#[test]
fn bench_rejects_a_missing_corpus_directory() {
    let out = ztdn(&["bench", "--corpus", "/nonexistent/filings"]);
    assert_eq!(exit(&out), 2);
}

#[test]
fn report_rejects_a_csv_with_a_bad_header() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "wrong,header\n1,2\n").unwrap();
    let out = ztdn(&["report", path.to_str().unwrap()]);
    assert_eq!(exit(&out), 2);
    assert!(stderr(&out).contains("line 1"), "stderr: {}", stderr(&out));
}

#[test]
fn wall_clock_timing_produces_positive_latencies() {
    let out = ztdn(&["bench", "--timing", "wall", "--runs", "1", "--requests", "3"]);
    assert_eq!(exit(&out), 0);
    for line in stdout(&out).lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        let check: u64 = fields[3].parse().unwrap();
        let round: u64 = fields[4].parse().unwrap();
        assert!(check >= 1, "wall-clock timings are at least a microsecond");
        assert!(round >= check);
    }
}
