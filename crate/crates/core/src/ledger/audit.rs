//! Independent re-verification of an exported ledger.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;

use super::dump::{DumpError, LedgerDump};
use super::merkle::MerkleTree;
use super::state::ApplyOutcome;
use super::tx::{Transaction, TxKind};
use super::{replay, ElectionConfig, TallyResult};
use crate::credentials::verify_presentation;
use crate::hash::Hash32;
use crate::hebackend::{combine, sum, Ciphertext, PartialDecryption};
use crate::zkproofs::{verify_share, verify_vote, ShareCorrectnessProof, VoteStatement};

const MAX_DETAIL_ITEMS: usize = 5;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AuditCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    pub checks: Vec<AuditCheck>,
    /// Tally recombined from the shares that verified.
    pub tally: Option<TallyResult>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed_checks(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let mark = if c.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "{mark} {:<22} {}", c.name, c.detail);
        }
        match &self.tally {
            Some(t) => {
                let _ = writeln!(
                    out,
                    "tally yes={} no={} total={}",
                    t.yes_count, t.no_count, t.total_votes
                );
            }
            None => out.push_str("tally unavailable\n"),
        }
        out
    }
}

struct Checks(Vec<AuditCheck>);

impl Checks {
    fn push(&mut self, name: &'static str, failures: &[String], ok_detail: String) {
        let passed = failures.is_empty();
        let detail = if passed {
            ok_detail
        } else {
            let mut d = failures
                .iter()
                .take(MAX_DETAIL_ITEMS)
                .cloned()
                .collect::<Vec<_>>()
                .join("; ");
            if failures.len() > MAX_DETAIL_ITEMS {
                let _ = write!(d, "; and {} more", failures.len() - MAX_DETAIL_ITEMS);
            }
            d
        };
        self.0.push(AuditCheck {
            name,
            passed,
            detail,
        });
    }
}

/// Decode and audit a binary dump.
pub fn audit_bytes(bytes: &[u8]) -> Result<AuditReport, DumpError> {
    let decoded = LedgerDump::decode(bytes)?;
    Ok(audit(&decoded.dump, decoded.integrity_ok))
}

pub fn audit(dump: &LedgerDump, integrity_ok: bool) -> AuditReport {
    let mut checks = Checks(Vec::new());
    checks.push(
        "dump-integrity",
        &if integrity_ok {
            vec![]
        } else {
            vec!["trailing digest does not match contents".into()]
        },
        "digest matches".into(),
    );

    let records = &dump.records;
    let configs: Vec<&ElectionConfig> = records
        .iter()
        .filter_map(|(_, tx)| match tx {
            Transaction::Config(c) => Some(&**c),
            _ => None,
        })
        .collect();
    let mut failures = Vec::new();
    if configs.len() != 1 {
        failures.push(format!("expected one configuration, found {}", configs.len()));
    }
    if !matches!(records.first(), Some((_, Transaction::Config(_)))) {
        failures.push("first record is not the configuration".into());
    }
    for (i, (_, tx)) in records.iter().enumerate() {
        if let Some(cfg) = configs.first() {
            if tx.election_id() != cfg.election_id() {
                failures.push(format!("record {i} references another election"));
            }
        }
    }
    checks.push("config", &failures, match configs.first() {
        Some(c) => format!("election {}", hex::encode(c.election_id())),
        None => String::new(),
    });

    let mut failures = Vec::new();
    let keys: Vec<(u64, TxKind, Hash32)> = records
        .iter()
        .map(|(tick, tx)| (*tick, tx.kind(), tx.hash()))
        .collect();
    for (i, pair) in keys.windows(2).enumerate() {
        if pair[0].0 > pair[1].0 {
            failures.push(format!("record {} tick {} precedes tick {}", i + 1, pair[1].0, pair[0].0));
        } else if pair[0] >= pair[1] {
            failures.push(format!("record {} out of canonical order", i + 1));
        }
    }
    checks.push("record-order", &failures, format!("{} records", records.len()));

    let Some(cfg) = configs.first().copied() else {
        return AuditReport {
            checks: checks.0,
            tally: None,
        };
    };

    // Registrations.
    let mut failures = Vec::new();
    let mut valid_cms = BTreeSet::new();
    let mut dup_cms = Vec::new();
    let mut reg_count = 0usize;
    for (i, (_, tx)) in records.iter().enumerate() {
        if let Transaction::Registration {
            commitment,
            presentation,
        } = tx
        {
            reg_count += 1;
            match verify_presentation(presentation, &cfg.registrar_pk, cfg.election_id()) {
                Ok(cm) if cm == *commitment => {
                    if !valid_cms.insert(*commitment) {
                        dup_cms.push(format!("commitment {} repeated", hex::encode(commitment)));
                    }
                }
                Ok(_) => failures.push(format!("record {i}: commitment not bound to credential")),
                Err(e) => failures.push(format!("record {i}: {e}")),
            }
        }
    }
    checks.push("registration-proofs", &failures, format!("{reg_count} registrations"));
    checks.push("commitment-uniqueness", &dup_cms, format!("{} commitments", valid_cms.len()));

    let root = MerkleTree::new(valid_cms.iter().copied().collect()).root();
    let mut failures = Vec::new();
    if let Some(claim) = &dump.claim {
        if claim.merkle_root != root {
            failures.push(format!(
                "claimed root {} but registrations give {}",
                hex::encode(claim.merkle_root),
                hex::encode(root)
            ));
        }
    }
    checks.push("merkle-root", &failures, hex::encode(root));

    // Votes.
    let mut failures = Vec::new();
    let mut nf_seen = BTreeMap::new();
    let mut dup_nfs = Vec::new();
    let mut ballots: Vec<&Ciphertext> = Vec::new();
    for (i, (_, tx)) in records.iter().enumerate() {
        if let Transaction::Vote {
            ciphertext,
            nullifier,
            proof,
            ..
        } = tx
        {
            if let Some(prev) = nf_seen.insert(*nullifier, i) {
                dup_nfs.push(format!("records {prev} and {i} share a nullifier"));
            }
            if !cfg.pk.is_unit_mod_n2(ciphertext.value()) {
                failures.push(format!("record {i}: ciphertext out of range"));
                continue;
            }
            let stmt = VoteStatement {
                election_id: *cfg.election_id(),
                merkle_root: root,
                nullifier: *nullifier,
                ciphertext,
                pk: &cfg.pk,
            };
            match verify_vote(cfg.vote_backend, &stmt, proof) {
                Ok(()) => ballots.push(ciphertext),
                Err(e) => failures.push(format!("record {i}: {e}")),
            }
        }
    }
    checks.push("vote-proofs", &failures, format!("{} ballots", ballots.len()));
    checks.push("nullifier-uniqueness", &dup_nfs, format!("{} nullifiers", nf_seen.len()));

    let (_, outcomes) = replay(records.iter().map(|(t, tx)| (*t, tx)));
    let failures: Vec<String> = outcomes
        .iter()
        .enumerate()
        .filter_map(|(i, o)| match o {
            ApplyOutcome::Applied => None,
            ApplyOutcome::Superseded { .. } => Some(format!("record {i} superseded an earlier record")),
            ApplyOutcome::Rejected(r) => Some(format!("record {i} rejected: {r}")),
        })
        .collect();
    checks.push("replay", &failures, "every record applies".into());

    let c_sum = sum(&cfg.pk, ballots.iter().copied());
    let mut failures = Vec::new();
    if let Some(claim) = &dump.claim {
        match &c_sum {
            Some(s) if *s.value() == claim.ballot_sum => {}
            _ => failures.push("recomputed ballot sum differs from the claimed sum".into()),
        }
        if claim.tally.total_votes != ballots.len() as u64 {
            failures.push(format!(
                "claim counts {} ballots, ledger holds {}",
                claim.tally.total_votes,
                ballots.len()
            ));
        }
    }
    checks.push(
        "ballot-sum",
        &failures,
        if dump.claim.is_some() { "matches claim".into() } else { "no claim recorded".into() },
    );

    // Shares.
    let mut failures = Vec::new();
    let mut verified: BTreeMap<u16, PartialDecryption> = BTreeMap::new();
    let share_records = records.iter().enumerate().filter_map(|(i, (_, tx))| match tx {
        Transaction::TallyShare { partial, proof, .. } => Some((i, partial, proof)),
        _ => None,
    });
    let mut share_count = 0;
    for (i, partial, proof) in share_records {
        share_count += 1;
        let Some(c_sum) = &c_sum else {
            failures.push(format!("record {i}: share without ballots"));
            continue;
        };
        let result = ShareCorrectnessProof::from_bytes(&cfg.pk, &cfg.params, proof)
            .map_err(|e| e.to_string())
            .and_then(|p| {
                verify_share(&cfg.pk, &cfg.params, partial.index, c_sum, partial, &p)
                    .map_err(|e| e.to_string())
            });
        match result {
            Ok(()) => {
                verified.entry(partial.index).or_insert_with(|| partial.clone());
            }
            Err(e) => failures.push(format!("record {i} (share {}): {e}", partial.index)),
        }
    }
    checks.push("share-proofs", &failures, format!("{share_count} shares"));

    let mut failures = Vec::new();
    let partials: Vec<PartialDecryption> = verified.into_values().collect();
    let total = ballots.len() as u64;
    let tally = if partials.is_empty() && dump.claim.is_none() {
        None
    } else {
        match combine(&cfg.pk, &cfg.params, &partials) {
            Ok(m) => match m.to_u64().filter(|&y| y <= total) {
                Some(yes) => Some(TallyResult {
                    yes_count: yes,
                    no_count: total - yes,
                    total_votes: total,
                }),
                None => {
                    failures.push(format!("decrypted value {m} exceeds ballot count {total}"));
                    None
                }
            },
            Err(e) => {
                failures.push(format!("cannot recombine: {e}"));
                None
            }
        }
    };
    if let (Some(claim), Some(t)) = (&dump.claim, &tally) {
        if claim.tally != *t {
            failures.push(format!(
                "claimed yes={} no={}, recomputed yes={} no={}",
                claim.tally.yes_count, claim.tally.no_count, t.yes_count, t.no_count
            ));
        }
    }
    checks.push(
        "tally",
        &failures,
        match &tally {
            Some(t) => format!("yes={} no={} from {} shares", t.yes_count, t.no_count, partials.len()),
            None => "no tally recorded".into(),
        },
    );

    AuditReport {
        checks: checks.0,
        tally,
    }
}
