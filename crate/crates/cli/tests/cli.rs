use std::path::{Path, PathBuf};
use std::process::Command;

use sdvote::ledger::LedgerDump;
use sdvote_cli::commands::{DUMP_FILE, TALLY_FILE, TRACE_FILE};
use sdvote_cli::{cmd_audit, cmd_bench, cmd_run, AuditOutcome, ExitCode, RunError, Scenario, ScenarioError};

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn sdvote(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_sdvote")).args(args).output().unwrap()
}

#[test]
fn smoke_scenario_matches_its_shadow_tally() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario("smoke.scenario");
    let shadow: u64 = Scenario::load(&path).unwrap().choices().iter().sum();
    let run = cmd_run(&path, dir.path()).unwrap();
    assert_eq!(run.exit, ExitCode::Success);
    assert_eq!(run.tally.expected_yes, shadow);
    assert_eq!(run.tally.expected_total, 20);
    for peer in &run.tally.peers {
        assert_eq!(peer.result.as_ref().unwrap().yes_count, shadow);
    }
    for file in [DUMP_FILE, TALLY_FILE, TRACE_FILE, "ledger.txt", "convergence.json"] {
        assert!(dir.path().join(file).is_file(), "{file}");
    }
    let tally: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join(TALLY_FILE)).unwrap()).unwrap();
    assert_eq!(tally["expected_yes"], shadow);
}

#[test]
fn bundled_scenarios_succeed_and_audit_clean() {
    for name in ["adversarial.scenario", "partition.scenario", "voter-held.scenario"] {
        let dir = tempfile::tempdir().unwrap();
        let run = cmd_run(&scenario(name), dir.path()).unwrap();
        assert_eq!(run.exit, ExitCode::Success, "{name}: {:?}", run.tally);
        let audit = cmd_audit(&run.dump_path);
        assert_eq!(audit.exit_code(), ExitCode::Success, "{name}: {}", audit.render(false));
    }
}

#[test]
fn runs_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    cmd_run(&scenario("smoke.scenario"), a.path()).unwrap();
    cmd_run(&scenario("smoke.scenario"), b.path()).unwrap();
    for file in [DUMP_FILE, TALLY_FILE, TRACE_FILE] {
        assert_eq!(
            std::fs::read(a.path().join(file)).unwrap(),
            std::fs::read(b.path().join(file)).unwrap(),
            "{file}"
        );
    }
}

#[test]
fn malformed_scenarios_are_validation_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("not toml", "seed = "),
        ("missing seed", "[election]\nbits = 256\nthreshold = 1\nshares = 1\n[voters]\ncount = 3\n"),
        ("empty seed", "seed = \"\"\n[election]\nbits = 256\nthreshold = 1\nshares = 1\n[voters]\ncount = 3\n"),
        ("bad threshold", "seed = \"x\"\n[election]\nbits = 256\nthreshold = 4\nshares = 3\n[voters]\ncount = 3\n"),
        ("odd bits", "seed = \"x\"\n[election]\nbits = 257\nthreshold = 1\nshares = 1\n[voters]\ncount = 3\n"),
        ("unknown field", "seed = \"x\"\ncolor = 1\n[election]\nbits = 256\nthreshold = 1\nshares = 1\n[voters]\ncount = 3\n"),
        ("bad script", "seed = \"x\"\n[election]\nbits = 256\nthreshold = 1\nshares = 1\n[voters]\ncount = 3\n[[adversary]]\nscript = \"bribe\"\n"),
        ("bad drop", "seed = \"x\"\n[election]\nbits = 256\nthreshold = 1\nshares = 1\n[voters]\ncount = 3\n[network]\ndrop_rate = 2.0\n"),
        ("bad choices", "seed = \"x\"\n[election]\nbits = 256\nthreshold = 1\nshares = 1\n[voters]\ncount = 2\nchoices = [1, 2]\n"),
        ("bad schedule", "seed = \"x\"\n[election]\nbits = 256\nthreshold = 1\nshares = 1\n[voters]\ncount = 2\n[schedule]\nregistration_close = 9\nvoting_close = 5\n"),
    ];
    for (name, text) in cases {
        let path = dir.path().join("bad.scenario");
        std::fs::write(&path, text).unwrap();
        let err = cmd_run(&path, &dir.path().join("out")).unwrap_err();
        assert!(
            matches!(err, RunError::Scenario(ScenarioError::Parse(_) | ScenarioError::Invalid(_))),
            "{name}: {err}"
        );
        assert_eq!(err.exit_code(), ExitCode::Validation, "{name}");
    }
    let missing = cmd_run(&dir.path().join("absent.scenario"), dir.path()).unwrap_err();
    assert_eq!(missing.exit_code(), ExitCode::Io);
}

#[test]
fn audit_flags_any_byte_tamper() {
    let dir = tempfile::tempdir().unwrap();
    let run = cmd_run(&scenario("smoke.scenario"), dir.path()).unwrap();
    let bytes = std::fs::read(&run.dump_path).unwrap();
    let tampered = dir.path().join("tampered.dump");
    for i in (0..bytes.len()).step_by(11) {
        let mut b = bytes.clone();
        b[i] ^= 0x20;
        std::fs::write(&tampered, &b).unwrap();
        let outcome = cmd_audit(&tampered);
        assert_ne!(outcome.exit_code(), ExitCode::Success, "byte {i}");
        if let AuditOutcome::Report(r) = &outcome {
            assert!(r.failed_checks().contains(&"dump-integrity"), "byte {i}");
        }
    }
}

#[test]
fn audit_flags_semantic_tamper_with_valid_digest() {
    let dir = tempfile::tempdir().unwrap();
    let run = cmd_run(&scenario("smoke.scenario"), dir.path()).unwrap();
    let mut dump = LedgerDump::decode(&std::fs::read(&run.dump_path).unwrap()).unwrap().dump;
    let claim = dump.claim.as_mut().unwrap();
    claim.tally.yes_count += 1;
    claim.tally.no_count -= 1;
    let path = dir.path().join("claim.dump");
    std::fs::write(&path, dump.encode()).unwrap();
    match cmd_audit(&path) {
        AuditOutcome::Report(r) => assert_eq!(r.failed_checks(), vec!["tally"]),
        other => panic!("{other:?}"),
    }
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let smoke = scenario("smoke.scenario");
    let run = sdvote(&["run", smoke.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(String::from_utf8_lossy(&run.stdout).contains("tally: yes"));

    let dump = out_dir.join(DUMP_FILE);
    let audit = sdvote(&["audit", dump.to_str().unwrap(), "--json"]);
    assert_eq!(audit.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&audit.stdout).unwrap();
    assert_eq!(report["checks"].as_array().unwrap().len(), 12);

    let bytes = std::fs::read(&dump).unwrap();
    let truncated = dir.path().join("truncated.dump");
    std::fs::write(&truncated, &bytes[..bytes.len() / 2]).unwrap();
    assert_eq!(sdvote(&["audit", truncated.to_str().unwrap()]).status.code(), Some(4));

    let mut flipped = bytes.clone();
    flipped[bytes.len() / 2] ^= 1;
    let flipped_path = dir.path().join("flipped.dump");
    std::fs::write(&flipped_path, &flipped).unwrap();
    let out = sdvote(&["audit", flipped_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL dump-integrity"));

    let bad = dir.path().join("bad.scenario");
    std::fs::write(&bad, "seed = 1").unwrap();
    assert_eq!(sdvote(&["run", bad.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(sdvote(&["audit", "/nonexistent/dump"]).status.code(), Some(4));
}

#[test]
fn bench_report_follows_the_extrapolation_formula() {
    let report = cmd_bench(512, 1).unwrap();
    let s = &report.sizes;
    assert_eq!(s.component("ciphertext"), Some(128));
    assert_eq!(s.component("commitment"), Some(32));
    assert_eq!(s.component("nullifier"), Some(32));
    let reg = s.transaction("registration").unwrap();
    let vote = s.transaction("vote").unwrap();
    let share = s.transaction("tally share").unwrap();
    assert_eq!(s.extrapolated, s.voters * (reg + vote) + s.participants * share);
    assert_eq!((s.voters, s.participants), (1_000_000, 100));
    let text = report.to_text();
    assert!(text.contains("reference: 2.40 GB"));
    assert!(text.contains("not comparable"));
    assert_eq!(report.timings.len(), 8);
}
