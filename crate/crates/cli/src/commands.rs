use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use serde::Serialize;

use sdvote::actors::{run_election, ObservedOutcome, PeerTally};
use sdvote::ledger::{audit_bytes, AuditReport};

use crate::bench::{run_bench, BenchReport};
use crate::scenario::{Scenario, ScenarioError};
use crate::ExitCode;

/// Files written by [`cmd_run`] inside the output directory.
pub const DUMP_FILE: &str = "ledger.dump";
pub const DUMP_TEXT_FILE: &str = "ledger.txt";
pub const TALLY_FILE: &str = "tally.json";
pub const CONVERGENCE_FILE: &str = "convergence.json";
pub const TRACE_FILE: &str = "trace.txt";

#[derive(Debug, Serialize)]
pub struct TallySummary {
    pub seed: String,
    pub expected_yes: u64,
    pub expected_total: u64,
    pub matches: bool,
    pub peers: Vec<PeerTally>,
    pub failed_voters: Vec<(usize, String)>,
    pub adversaries: Vec<ObservedOutcome>,
}

#[derive(Debug, Serialize)]
pub struct ConvergenceSummary {
    pub tick: u64,
    pub converged: bool,
    pub messages_sent: u64,
    pub messages_dropped: u64,
    pub safety_violations: Vec<usize>,
    pub peers: Vec<PeerLine>,
}

#[derive(Debug, Serialize)]
pub struct PeerLine {
    pub peer: usize,
    pub honest: bool,
    pub records: usize,
    pub state_hash: String,
}

#[derive(Debug)]
pub struct RunOutput {
    pub tally: TallySummary,
    pub convergence: ConvergenceSummary,
    pub dump_path: PathBuf,
    pub exit: ExitCode,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("election failed: {0}")]
    Election(String),
    #[error("cannot write results: {0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            RunError::Scenario(ScenarioError::Io(_)) | RunError::Io(_) => ExitCode::Io,
            RunError::Scenario(_) | RunError::Election(_) => ExitCode::Validation,
        }
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> std::io::Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
    fs::write(path, text + "\n")
}

/// Run a scenario and write its artifacts into `out_dir`.
pub fn cmd_run(scenario_path: &Path, out_dir: &Path) -> Result<RunOutput, RunError> {
    let scenario = Scenario::load(scenario_path)?;
    let spec = scenario.election_spec();
    info!(
        "running {} voters, {} peers, t={} of {}",
        spec.choices.len(),
        spec.network.peer_count,
        spec.t,
        spec.big_n
    );
    let out = run_election(&spec).map_err(|e| RunError::Election(e.to_string()))?;

    fs::create_dir_all(out_dir)?;
    let dump_path = out_dir.join(DUMP_FILE);
    fs::write(&dump_path, out.dump.encode())?;
    fs::write(out_dir.join(DUMP_TEXT_FILE), out.dump.to_text())?;
    if spec.network.trace {
        fs::write(out_dir.join(TRACE_FILE), &out.trace)?;
    }

    let tally = TallySummary {
        seed: scenario.seed.clone(),
        expected_yes: out.expected_yes,
        expected_total: out.expected_total,
        matches: out.tally_matches(),
        peers: out.tallies.clone(),
        failed_voters: out.failed_voters.clone(),
        adversaries: out.adversaries.clone(),
    };
    let c = &out.convergence;
    let convergence = ConvergenceSummary {
        tick: c.tick,
        converged: c.converged,
        messages_sent: c.messages_sent,
        messages_dropped: c.messages_dropped,
        safety_violations: out.safety_violations.clone(),
        peers: c
            .peers
            .iter()
            .map(|p| PeerLine {
                peer: p.peer,
                honest: p.honest,
                records: p.records,
                state_hash: hex::encode(p.state_hash),
            })
            .collect(),
    };
    write_json(&out_dir.join(TALLY_FILE), &tally)?;
    write_json(&out_dir.join(CONVERGENCE_FILE), &convergence)?;

    let ok = tally.matches
        && convergence.converged
        && convergence.safety_violations.is_empty()
        && tally.adversaries.iter().all(|a| a.as_expected);
    Ok(RunOutput {
        tally,
        convergence,
        dump_path,
        exit: if ok { ExitCode::Success } else { ExitCode::AuditFailure },
    })
}

#[derive(Debug)]
pub enum AuditOutcome {
    Report(AuditReport),
    Corrupt(String),
}

impl AuditOutcome {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            AuditOutcome::Report(r) if r.passed() => ExitCode::Success,
            AuditOutcome::Report(_) => ExitCode::AuditFailure,
            AuditOutcome::Corrupt(_) => ExitCode::Io,
        }
    }

    pub fn render(&self, json: bool) -> String {
        match (self, json) {
            (AuditOutcome::Report(r), true) => serde_json::to_string_pretty(r).expect("serializable") + "\n",
            (AuditOutcome::Report(r), false) => r.to_text(),
            (AuditOutcome::Corrupt(msg), true) => {
                serde_json::json!({ "corrupt": msg }).to_string() + "\n"
            }
            (AuditOutcome::Corrupt(msg), false) => format!("cannot audit: {msg}\n"),
        }
    }
}

/// Audit a ledger dump file.
pub fn cmd_audit(dump_path: &Path) -> AuditOutcome {
    let bytes = match fs::read(dump_path) {
        Ok(b) => b,
        Err(e) => return AuditOutcome::Corrupt(e.to_string()),
    };
    match audit_bytes(&bytes) {
        Ok(report) => AuditOutcome::Report(report),
        Err(e) => AuditOutcome::Corrupt(e.to_string()),
    }
}

pub fn cmd_bench(bits: u32, trials: usize) -> Result<BenchReport, crate::bench::BenchError> {
    run_bench(bits, trials)
}
