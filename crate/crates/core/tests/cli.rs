mod common;

use std::path::Path;
use std::process::{Command, Output};

fn dcelab(args: &[&str], out_dir: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_dcelab"));
    cmd.args(args).env_remove(dcelab_core::cli::OUT_DIR_ENV);
    if let Some(d) = out_dir {
        cmd.env(dcelab_core::cli::OUT_DIR_ENV, d);
    }
    cmd.output().unwrap()
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

fn golden_config(name: &str) -> String {
    common::tests_dir()
        .join("golden")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

#[test]
fn run_writes_trace_state_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dcelab(
        &[
            "run-lemma2",
            "--config",
            &golden_config("lemma2.json"),
            "--out-dir",
            dir.path().to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    assert!(text(&out.stdout).contains("verdict: PASS"));
    for f in [
        "lemma2.trace.jsonl",
        "lemma2.state.json",
        "lemma2.report.txt",
        "lemma2.report.json",
    ] {
        assert!(dir.path().join(f).is_file(), "{f} missing");
    }
    let golden = std::fs::read(common::tests_dir().join("golden/lemma2.trace.jsonl")).unwrap();
    assert_eq!(std::fs::read(dir.path().join("lemma2.trace.jsonl")).unwrap(), golden);
    let json: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("lemma2.report.json")).unwrap()).unwrap();
    assert_eq!(json["engine"], "lemma2");
}

#[test]
fn env_var_sets_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = dcelab(
        &["run-prop3", "--config", &golden_config("prop3.json")],
        Some(dir.path()),
    );
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    assert!(dir.path().join("prop3.trace.jsonl").is_file());
}

#[test]
fn replay_reproduces_recorded_state() {
    let trace = golden_config("prop3.trace.jsonl");
    let state = golden_config("prop3.state.json");
    let out = dcelab(&["replay", "--trace", &trace, "--state", &state], None);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));

    let out = dcelab(&["replay", "--trace", &golden_config("lemma2.trace.jsonl")], None);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(out.stdout, std::fs::read(golden_config("lemma2.state.json")).unwrap());
}

#[test]
fn replay_mismatch_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let state = dir.path().join("state.json");
    let recorded = std::fs::read_to_string(golden_config("lemma2.state.json")).unwrap();
    let edited = recorded.replacen("\"beta\": \"123/512\"", "\"beta\": \"124/512\"", 1);
    assert_ne!(edited, recorded);
    std::fs::write(&state, edited).unwrap();
    let out = dcelab(
        &[
            "replay",
            "--trace",
            &golden_config("lemma2.trace.jsonl"),
            "--state",
            state.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_accepts_golden_and_rejects_tampered_trace() {
    let out = dcelab(&["verify", "--trace", &golden_config("lemma2.trace.jsonl")], None);
    assert_eq!(out.status.code(), Some(0));

    let dir = tempfile::tempdir().unwrap();
    let tampered = dir.path().join("t.jsonl");
    let original = std::fs::read_to_string(golden_config("lemma2.trace.jsonl")).unwrap();
    let edited = original.replacen(r#""new_value":"27/128"}"#, r#""new_value":"28/128"}"#, 1);
    assert_ne!(edited, original);
    std::fs::write(&tampered, edited).unwrap();
    let out = dcelab(&["verify", "--trace", tampered.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        text(&out.stderr).contains("verification failed: "),
        "{}",
        text(&out.stderr)
    );

    let original = std::fs::read_to_string(golden_config("prop3.trace.jsonl")).unwrap();
    let edited = original.replacen(
        r#""event_kind":"define","requirement":"L1","old_value":null,"new_value":"7""#,
        r#""event_kind":"define","requirement":"L1","old_value":null,"new_value":"3""#,
        1,
    );
    assert_ne!(edited, original);
    std::fs::write(&tampered, edited).unwrap();
    let out = dcelab(&["verify", "--trace", tampered.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"engine": "lemma2", "stages": 10}"#).unwrap();
    let out = dcelab(&["run-lemma2", "--config", bad.to_str().unwrap()], Some(dir.path()));
    assert_eq!(out.status.code(), Some(2));

    std::fs::write(&bad, r#"{"engine": "prop3", "stages": 10, "suite": [], "colour": 1}"#).unwrap();
    let out = dcelab(&["run-prop3", "--config", bad.to_str().unwrap()], Some(dir.path()));
    assert_eq!(out.status.code(), Some(2));

    let out = dcelab(
        &["run-prop3", "--config", &golden_config("lemma2.json")],
        Some(dir.path()),
    );
    assert_eq!(out.status.code(), Some(2));

    let out = dcelab(&["run-lemma2", "--config", "/nonexistent/c.json"], None);
    assert_eq!(out.status.code(), Some(2));

    let out = dcelab(&["no-such-command"], None);
    assert_eq!(out.status.code(), Some(2));

    std::fs::write(&bad, "not json\n").unwrap();
    let out = dcelab(&["verify", "--trace", bad.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn stage_cap_is_enforced() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(
        &cfg,
        r#"{"engine": "prop3", "stages": 100, "max_stages": 50, "suite": []}"#,
    )
    .unwrap();
    let out = dcelab(&["run-prop3", "--config", cfg.to_str().unwrap()], Some(dir.path()));
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("cap"));
}

#[test]
fn solovay_check_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("s.json");
    // β = α/2 stage by stage, so β's increments are half of α's.
    let write = |q: &str| {
        std::fs::write(
            &cfg,
            format!(
                r#"{{"alpha": {{"kind": "constant_target", "limit": "1/2", "direction": "increasing", "rate": "1/2"}},
                    "beta": {{"kind": "constant_target", "limit": "1/4", "direction": "increasing", "rate": "1/2"}},
                    "q": "{q}", "clause": "c", "stages": 40}}"#
            ),
        )
        .unwrap()
    };
    write("1");
    let out = dcelab(&["solovay", "check", "--config", cfg.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    write("1/2");
    let out = dcelab(&["solovay", "check", "--config", cfg.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("fails at stage 0"));
}

#[test]
fn speedup_and_omega_emit_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("p.json");
    std::fs::write(
        &cfg,
        r#"{"alpha": {"kind": "table", "values": ["0", "1/8", "3/16"], "direction": "increasing"},
            "beta": {"kind": "table", "values": ["0", "1/4", "3/8"], "direction": "increasing"},
            "p": "3/4", "stages": 2}"#,
    )
    .unwrap();
    let out = dcelab(&["solovay", "speedup", "--config", cfg.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    assert_eq!(
        text(&out.stdout),
        "stage,alpha,beta,gamma\n0,0/1,0/1,0/1\n1,1/8,1/4,1/8\n2,3/16,3/8,3/16\n"
    );

    let out = dcelab(
        &[
            "omega",
            "enumerate",
            "--machine",
            "single",
            "--length",
            "4",
            "--stages",
            "2",
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    assert!(text(&out.stdout).starts_with("stage,omega\n0,0/1\n"));
}
