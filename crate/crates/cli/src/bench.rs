//! Serialized sizes and proof timings against the reference estimates.

use std::fmt::Write as _;
use std::time::Instant;

use rug::Integer;
use serde::Serialize;

use sdvote::credentials::{issuer_issue_vc, present, verify_presentation, IssuerKey, RegistrarState};
use sdvote::hash;
use sdvote::hebackend::{combine, encrypt, keygen, partial_decrypt, HeError};
use sdvote::ledger::{merkle::MerkleTree, ElectionConfig, PhaseSchedule, Transaction};
use sdvote::rng;
use sdvote::zkproofs::{
    prove_enc_validity, prove_share, prove_vote, verify_enc_validity, verify_share, verify_vote,
    BackendId, ProofError, VoteStatement, VoteWitness,
};

/// Voters and tally participants used for the extrapolated total.
pub const EXTRAPOLATE_VOTERS: u64 = 1_000_000;
pub const EXTRAPOLATE_PARTICIPANTS: u64 = 100;
/// Per-transaction envelope (signature, key, framing) assumed by the
/// reference estimates; the simulated ledger carries no such envelope.
pub const REFERENCE_ENVELOPE: u64 = 300;
/// Reference total for the extrapolated election, in bytes.
pub const REFERENCE_TOTAL: u64 = 2_400_000_000;

const PATH_STEP_BYTES: u64 = 33;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Encryption(#[from] HeError),
    #[error(transparent)]
    Proof(#[from] ProofError),
    #[error("setup failed: {0}")]
    Setup(String),
}

#[derive(Clone, Debug, Serialize)]
pub struct SizeRow {
    pub item: &'static str,
    pub measured: u64,
    pub reference: Option<u64>,
    pub note: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct SizeReport {
    pub bits: u32,
    pub components: Vec<SizeRow>,
    pub transactions: Vec<SizeRow>,
    pub voters: u64,
    pub participants: u64,
    /// `V·(reg + vote) + P·share` over measured transaction sizes.
    pub extrapolated: u64,
    /// Same, with the reference envelope added to every transaction.
    pub extrapolated_with_envelope: u64,
    pub reference_total: u64,
}

impl SizeReport {
    pub fn component(&self, item: &str) -> Option<u64> {
        self.components.iter().find(|r| r.item == item).map(|r| r.measured)
    }

    pub fn transaction(&self, item: &str) -> Option<u64> {
        self.transactions.iter().find(|r| r.item == item).map(|r| r.measured)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TimingRow {
    pub operation: &'static str,
    pub median_ms: f64,
    pub trials: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchReport {
    pub sizes: SizeReport,
    pub timings: Vec<TimingRow>,
}

fn median_ms<F: FnMut()>(trials: usize, mut f: F) -> f64 {
    let mut samples: Vec<f64> = (0..trials.max(1))
        .map(|_| {
            let start = Instant::now();
            f();
            start.elapsed().as_secs_f64() * 1e3
        })
        .collect();
    samples.sort_by(f64::total_cmp);
    let mid = samples.len() / 2;
    if samples.len() % 2 == 1 {
        samples[mid]
    } else {
        (samples[mid - 1] + samples[mid]) / 2.0
    }
}

fn merkle_depth(leaves: u64) -> u64 {
    u64::from(leaves.max(1).next_power_of_two().trailing_zeros())
}

/// Measure sizes and timings at `bits` with `trials` repetitions per timed
/// operation. Keys and proofs derive from a fixed seed.
pub fn run_bench(bits: u32, trials: usize) -> Result<BenchReport, BenchError> {
    let mut rng = rng::from_seed(b"bench");
    let keys = keygen(bits, 2, 3, &mut rng)?;
    let pk = &keys.pk;
    let issuer = IssuerKey::generate(b"idp", &mut rng);
    let mut registrar = RegistrarState::generate(&mut rng);
    registrar.trust_issuer(&issuer.issuer_id, issuer.verifying_key());
    let config = ElectionConfig::new(
        "Adopt the proposal?",
        [0; 16],
        pk.clone(),
        keys.params.clone(),
        registrar.verifying_key(),
        BackendId::Transparent,
        PhaseSchedule {
            registration_close: 10,
            voting_close: 20,
            tally_close: None,
        },
    )
    .map_err(|e| BenchError::Setup(e.to_string()))?;
    let eid = *config.election_id();
    let vc = issuer_issue_vc(&issuer, b"bench-person", Default::default())
        .map_err(|e| BenchError::Setup(e.to_string()))?;
    let credential = registrar
        .register(&vc, &eid, 1_700_000_000, &mut rng)
        .map_err(|e| BenchError::Setup(e.to_string()))?;
    let presentation = present(&credential);
    let cm = credential.commitment();

    // A small tree; the vote size is rescaled to the extrapolated depth.
    let mut leaves: Vec<_> = (0u8..7).map(|i| [i; 32]).collect();
    leaves.push(cm);
    leaves.sort();
    let tree = MerkleTree::new(leaves);
    let measured_depth = merkle_depth(tree.len() as u64);

    let (c, r) = encrypt(pk, &Integer::from(1), &mut rng)?;
    let nf = hash::vote_nullifier(&credential.secret_id, &eid);
    let witness = VoteWitness {
        secret_id: credential.secret_id,
        choice: 1,
        randomizer: r.clone(),
        merkle_path: tree.path_for(&cm).expect("member"),
    };
    let stmt = VoteStatement {
        election_id: eid,
        merkle_root: tree.root(),
        nullifier: nf,
        ciphertext: &c,
        pk,
    };
    let vote_proof = prove_vote(BackendId::Transparent, &stmt, &witness, &mut rng)?;
    let enc_proof = prove_enc_validity(pk, &c, 1, &r, b"bench", &mut rng)?;
    let share = &keys.shares[0];
    let partial = partial_decrypt(pk, share, &keys.params, &c);
    let share_proof = prove_share(pk, share, &keys.params, &c, &partial, &mut rng)?;

    let reg_tx = Transaction::Registration {
        commitment: cm,
        presentation: presentation.clone(),
    };
    let vote_tx = Transaction::Vote {
        election_id: eid,
        ciphertext: c.clone(),
        nullifier: nf,
        proof: vote_proof.clone(),
    };
    let share_tx = Transaction::TallyShare {
        election_id: eid,
        partial: partial.clone(),
        proof: share_proof.to_bytes(pk, &keys.params),
    };
    let config_tx = Transaction::Config(Box::new(config.clone()));

    let extra_depth = merkle_depth(EXTRAPOLATE_VOTERS).saturating_sub(measured_depth);
    let len = |b: Vec<u8>| b.len() as u64;
    let vote_bytes = len(vote_tx.to_bytes()) + PATH_STEP_BYTES * extra_depth;
    let reg_bytes = len(reg_tx.to_bytes());
    let share_bytes = len(share_tx.to_bytes());

    let components = vec![
        SizeRow { item: "ciphertext", measured: len(c.to_bytes(pk)), reference: Some(512), note: "" },
        SizeRow { item: "commitment", measured: cm.len() as u64, reference: Some(32), note: "" },
        SizeRow { item: "nullifier", measured: nf.len() as u64, reference: Some(32), note: "" },
        SizeRow {
            item: "registration proof",
            measured: len(presentation.to_bytes()),
            reference: Some(1000),
            note: "signed salted commitments vs. BBS",
        },
        SizeRow {
            item: "vote proof",
            measured: len(vote_proof.to_bytes()) + PATH_STEP_BYTES * extra_depth,
            reference: Some(200),
            note: "transparent witness vs. Groth16",
        },
        SizeRow {
            item: "encryption proof",
            measured: len(enc_proof.to_bytes(pk)),
            reference: None,
            note: "embedded in the vote proof",
        },
        SizeRow {
            item: "share proof",
            measured: len(share_proof.to_bytes(pk, &keys.params)),
            reference: Some(200),
            note: "Chaum-Pedersen vs. Groth16",
        },
    ];
    let transactions = vec![
        SizeRow { item: "config", measured: len(config_tx.to_bytes()), reference: Some(10_000), note: "5-10 KB" },
        SizeRow { item: "registration", measured: reg_bytes, reference: Some(1_332), note: "~1.3 KB" },
        SizeRow { item: "vote", measured: vote_bytes, reference: Some(1_044), note: "~1.1 KB" },
        SizeRow { item: "tally share", measured: share_bytes, reference: Some(1_012), note: "~1.0 KB" },
    ];
    let (v, p) = (EXTRAPOLATE_VOTERS, EXTRAPOLATE_PARTICIPANTS);
    let extrapolated = v * (reg_bytes + vote_bytes) + p * share_bytes;
    let extrapolated_with_envelope = extrapolated + (2 * v + p) * REFERENCE_ENVELOPE;
    let sizes = SizeReport {
        bits,
        components,
        transactions,
        voters: v,
        participants: p,
        extrapolated,
        extrapolated_with_envelope,
        reference_total: REFERENCE_TOTAL,
    };

    let rpk = registrar.verifying_key();
    let index = partial.index;
    let timings = vec![
        TimingRow {
            operation: "encrypt",
            median_ms: median_ms(trials, || {
                encrypt(pk, &Integer::from(1), &mut rng::from_seed(b"t")).unwrap();
            }),
            trials,
        },
        TimingRow {
            operation: "prove encryption validity",
            median_ms: median_ms(trials, || {
                prove_enc_validity(pk, &c, 1, &r, b"bench", &mut rng::from_seed(b"t")).unwrap();
            }),
            trials,
        },
        TimingRow {
            operation: "verify encryption validity",
            median_ms: median_ms(trials, || verify_enc_validity(pk, &c, &enc_proof, b"bench").unwrap()),
            trials,
        },
        TimingRow {
            operation: "verify vote proof",
            median_ms: median_ms(trials, || verify_vote(BackendId::Transparent, &stmt, &vote_proof).unwrap()),
            trials,
        },
        TimingRow {
            operation: "verify presentation",
            median_ms: median_ms(trials, || {
                verify_presentation(&presentation, &rpk, &eid).unwrap();
            }),
            trials,
        },
        TimingRow {
            operation: "partial decryption",
            median_ms: median_ms(trials, || {
                partial_decrypt(pk, share, &keys.params, &c);
            }),
            trials,
        },
        TimingRow {
            operation: "verify share proof",
            median_ms: median_ms(trials, || {
                verify_share(pk, &keys.params, index, &c, &partial, &share_proof).unwrap()
            }),
            trials,
        },
        TimingRow {
            operation: "combine shares",
            median_ms: {
                let second = partial_decrypt(pk, &keys.shares[1], &keys.params, &c);
                let pair = [partial.clone(), second];
                median_ms(trials, || {
                    combine(pk, &keys.params, &pair).unwrap();
                })
            },
            trials,
        },
    ];
    Ok(BenchReport { sizes, timings })
}

fn kb(bytes: u64) -> String {
    format!("{:.2} KB", bytes as f64 / 1000.0)
}

fn gb(bytes: u64) -> String {
    format!("{:.2} GB", bytes as f64 / 1e9)
}

impl BenchReport {
    pub fn timing(&self, operation: &str) -> Option<f64> {
        self.timings.iter().find(|t| t.operation == operation).map(|t| t.median_ms)
    }

    pub fn to_text(&self) -> String {
        let s = &self.sizes;
        let mut out = String::new();
        let _ = writeln!(out, "sizes at {} bits (bytes)", s.bits);
        let _ = writeln!(out, "{:<22} {:>10} {:>10}  note", "item", "measured", "reference");
        for r in s.components.iter().chain(&s.transactions) {
            let reference = r.reference.map(|x| x.to_string()).unwrap_or_else(|| "-".into());
            let _ = writeln!(out, "{:<22} {:>10} {:>10}  {}", r.item, r.measured, reference, r.note);
        }
        let _ = writeln!(
            out,
            "vote sizes assume a membership path for {} registered voters",
            s.voters
        );
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "V = {}, P = {}: V*(reg + vote) + P*share = {} ({}); with a {} B envelope per tx: {}; reference: {}",
            s.voters,
            s.participants,
            s.extrapolated,
            gb(s.extrapolated),
            REFERENCE_ENVELOPE,
            gb(s.extrapolated_with_envelope),
            gb(s.reference_total),
        );
        let _ = writeln!(
            out,
            "per voter: measured {}, reference {}",
            kb(s.transaction("registration").unwrap_or(0) + s.transaction("vote").unwrap_or(0)),
            kb(2_400)
        );
        let _ = writeln!(
            out,
            "proof sizes come from the transparent reference backends and are not comparable to SNARK or BBS sizes"
        );
        let _ = writeln!(out);
        let _ = writeln!(out, "{:<28} {:>12}", "operation", "median ms");
        for t in &self.timings {
            let _ = writeln!(out, "{:<28} {:>12.3}", t.operation, t.median_ms);
        }
        out
    }
}
