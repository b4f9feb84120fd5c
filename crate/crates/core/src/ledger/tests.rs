use rug::Integer;

use super::*;
use crate::credentials::{issuer_issue_vc, present, Credential, IssuerKey, RegistrarState};
use crate::hash::{self, Hash32};
use crate::hebackend::{decrypt_direct, encrypt, encrypt_with, keygen, partial_decrypt, ThresholdKeys};
use crate::rng::{self, DeterministicRng};
use crate::zkproofs::{prove_share, prove_vote, BackendId, VoteStatement, VoteWitness};

const REG_CLOSE: u64 = 100;
const VOTE_CLOSE: u64 = 200;

struct Fixture {
    keys: ThresholdKeys,
    registrar: RegistrarState,
    issuer: IssuerKey,
    cfg: ElectionConfig,
    rng: DeterministicRng,
    next_pid: u32,
}

impl Fixture {
    fn new(seed: &[u8], t: u16, n: u16) -> Self {
        let mut rng = rng::from_seed(seed);
        let keys = keygen(512, t, n, &mut rng).unwrap();
        let issuer = IssuerKey::generate(b"idp", &mut rng);
        let mut registrar = RegistrarState::generate(&mut rng);
        registrar.trust_issuer(&issuer.issuer_id, issuer.verifying_key());
        let cfg = ElectionConfig::new(
            "Adopt the proposal?",
            [7; 16],
            keys.pk.clone(),
            keys.params.clone(),
            registrar.verifying_key(),
            BackendId::Transparent,
            PhaseSchedule {
                registration_close: REG_CLOSE,
                voting_close: VOTE_CLOSE,
                tally_close: None,
            },
        )
        .unwrap();
        Self {
            keys,
            registrar,
            issuer,
            cfg,
            rng,
            next_pid: 0,
        }
    }

    fn config_tx(&self) -> Transaction {
        Transaction::Config(Box::new(self.cfg.clone()))
    }

    fn credential(&mut self) -> Credential {
        self.next_pid += 1;
        let vc = issuer_issue_vc(&self.issuer, &self.next_pid.to_be_bytes(), Default::default()).unwrap();
        self.registrar
            .register(&vc, self.cfg.election_id(), 1_700_000_000, &mut self.rng)
            .unwrap()
    }

    fn registration(cred: &Credential) -> Transaction {
        Transaction::Registration {
            commitment: cred.commitment(),
            presentation: present(cred),
        }
    }

    fn vote(&mut self, cred: &Credential, choice: u64, tree: &MerkleTree) -> Transaction {
        let eid = *self.cfg.election_id();
        let (c, r) = encrypt(&self.keys.pk, &Integer::from(choice), &mut self.rng).unwrap();
        let nf = hash::vote_nullifier(&cred.secret_id, &eid);
        let w = VoteWitness {
            secret_id: cred.secret_id,
            choice,
            randomizer: r,
            merkle_path: tree.path_for(&cred.commitment()).unwrap(),
        };
        let stmt = VoteStatement {
            election_id: eid,
            merkle_root: tree.root(),
            nullifier: nf,
            ciphertext: &c,
            pk: &self.keys.pk,
        };
        let proof = prove_vote(BackendId::Transparent, &stmt, &w, &mut self.rng).unwrap();
        Transaction::Vote {
            election_id: eid,
            ciphertext: c,
            nullifier: nf,
            proof,
        }
    }

    fn share(&mut self, state: &LedgerState, index: u16) -> Transaction {
        let c_sum = state.compute_sum().unwrap();
        let share = &self.keys.shares[usize::from(index) - 1];
        let partial = partial_decrypt(&self.keys.pk, share, &self.keys.params, &c_sum);
        let proof = prove_share(&self.keys.pk, share, &self.keys.params, &c_sum, &partial, &mut self.rng).unwrap();
        Transaction::TallyShare {
            election_id: *self.cfg.election_id(),
            partial,
            proof: proof.to_bytes(&self.keys.pk, &self.keys.params),
        }
    }
}

fn step(state: &mut LedgerState, tx: &Transaction, tick: u64) -> ApplyOutcome {
    state.advance_phase(tick);
    state.apply(tx, tick)
}

/// Full election: returns the fixture, the final state, and the choices.
fn run(seed: &[u8], voters: usize, t: u16, n: u16) -> (Fixture, LedgerState, Vec<u64>) {
    let mut f = Fixture::new(seed, t, n);
    let mut state = LedgerState::new();
    assert_eq!(step(&mut state, &f.config_tx(), 0), ApplyOutcome::Applied);
    let creds: Vec<_> = (0..voters).map(|_| f.credential()).collect();
    for (i, cred) in creds.iter().enumerate() {
        assert_eq!(step(&mut state, &Fixture::registration(cred), 1 + i as u64 % 90), ApplyOutcome::Applied);
    }
    state.advance_phase(REG_CLOSE);
    let tree = state.frozen_tree().unwrap().clone();
    let choices: Vec<u64> = (0..voters).map(|i| (hash::tagged(0xaa, &[seed, &[i as u8]])[0] % 2) as u64).collect();
    for (i, cred) in creds.iter().enumerate() {
        let tx = f.vote(cred, choices[i], &tree);
        assert_eq!(step(&mut state, &tx, REG_CLOSE + 1 + i as u64 % 90), ApplyOutcome::Applied);
    }
    state.advance_phase(VOTE_CLOSE);
    for index in 1..=t {
        let tx = f.share(&state, index);
        assert_eq!(step(&mut state, &tx, VOTE_CLOSE + u64::from(index)), ApplyOutcome::Applied);
    }
    (f, state, choices)
}

#[test]
fn honest_election_tallies_exactly() {
    let (f, state, choices) = run(b"honest", 12, 2, 3);
    let result = state.finalize_tally().unwrap();
    let yes: u64 = choices.iter().sum();
    assert_eq!(result.yes_count, yes);
    assert_eq!(result.total_votes, 12);
    assert_eq!(result.yes_count + result.no_count, 12);
    assert_eq!(decrypt_direct(&f.keys.secret, &state.compute_sum().unwrap()), yes);
    assert_eq!(state.ballot_count(), state.vote_nullifiers().count());
}

#[test]
fn frozen_root_matches_independent_tree() {
    let (_, state, _) = run(b"root", 7, 1, 1);
    let mut cms: Vec<Hash32> = state.commitments().copied().collect();
    cms.sort();
    assert_eq!(state.frozen_root(), Some(MerkleTree::new(cms).root()));
}

#[test]
fn phase_gates() {
    let mut f = Fixture::new(b"gates", 1, 1);
    let mut state = LedgerState::new();
    let cred = f.credential();
    assert_eq!(
        step(&mut state, &Fixture::registration(&cred), 1),
        ApplyOutcome::Rejected(RejectReason::UnknownElection)
    );
    assert_eq!(state.phase(), Phase::Setup);
    step(&mut state, &f.config_tx(), 0);
    assert_eq!(
        step(&mut state, &f.config_tx(), 1),
        ApplyOutcome::Rejected(RejectReason::ConfigAlreadySet)
    );
    assert_eq!(state.advance_phase(50), Phase::Registration);
    step(&mut state, &Fixture::registration(&cred), 50);

    let tree = MerkleTree::new(vec![cred.commitment()]);
    let vote = f.vote(&cred, 1, &tree);
    assert_eq!(step(&mut state, &vote, 60), ApplyOutcome::Rejected(RejectReason::WrongPhase));

    let late = f.credential();
    assert_eq!(state.advance_phase(REG_CLOSE), Phase::Voting);
    assert_eq!(
        state.apply(&Fixture::registration(&late), 99),
        ApplyOutcome::Rejected(RejectReason::LateArrival)
    );
    assert_eq!(
        state.apply(&Fixture::registration(&late), 101),
        ApplyOutcome::Rejected(RejectReason::WrongPhase)
    );
    assert_eq!(state.advance_phase(VOTE_CLOSE - 1), Phase::Voting);
    assert_eq!(state.advance_phase(VOTE_CLOSE), Phase::Tally);
    assert_eq!(state.advance_phase(0), Phase::Tally);
}

#[test]
fn duplicate_nullifier_keeps_smallest_key() {
    let mut f = Fixture::new(b"dupnf", 1, 1);
    let mut state = LedgerState::new();
    step(&mut state, &f.config_tx(), 0);
    let cred = f.credential();
    step(&mut state, &Fixture::registration(&cred), 1);
    state.advance_phase(REG_CLOSE);
    let tree = state.frozen_tree().unwrap().clone();
    let first = f.vote(&cred, 1, &tree);
    let second = f.vote(&cred, 0, &tree);

    assert_eq!(step(&mut state, &first, 120), ApplyOutcome::Applied);
    assert_eq!(
        step(&mut state, &second, 130),
        ApplyOutcome::Rejected(RejectReason::DuplicateNullifier)
    );
    // An earlier-origin conflicting vote replaces the held one.
    assert_eq!(
        state.apply(&second, 110),
        ApplyOutcome::Superseded { replaced: first.hash() }
    );
    assert_eq!(state.ballot_count(), 1);
    assert_eq!(state.record_count(), 3);
    assert_eq!(state.apply(&first, 120), ApplyOutcome::Rejected(RejectReason::DuplicateNullifier));
}

#[test]
fn rejections_leave_state_untouched() {
    let mut f = Fixture::new(b"atomic", 1, 1);
    let mut state = LedgerState::new();
    step(&mut state, &f.config_tx(), 0);
    let cred = f.credential();
    let other = f.credential();
    step(&mut state, &Fixture::registration(&cred), 1);
    let before = state.clone();

    let foreign = Transaction::Registration {
        commitment: hash::commitment(&[0x42; 32]),
        presentation: present(&other),
    };
    assert_eq!(state.apply(&foreign, 2), ApplyOutcome::Rejected(RejectReason::CommitmentMismatch));
    assert_eq!(
        state.apply(&Fixture::registration(&cred), 3),
        ApplyOutcome::Rejected(RejectReason::DuplicateCommitment)
    );
    assert_eq!(state, before);

    state.advance_phase(REG_CLOSE);
    let tree = state.frozen_tree().unwrap().clone();
    let snapshot = state.clone();
    let eid = *f.cfg.election_id();
    let c2 = encrypt_with(&f.keys.pk, &Integer::from(2), &Integer::from(5)).unwrap();
    // Graft a valid proof onto an encryption of 2.
    let honest = f.vote(&cred, 1, &tree);
    let Transaction::Vote { nullifier, proof, .. } = honest else { unreachable!() };
    let forged = Transaction::Vote {
        election_id: eid,
        ciphertext: c2,
        nullifier,
        proof,
    };
    assert!(matches!(state.apply(&forged, 150), ApplyOutcome::Rejected(RejectReason::InvalidProof(_))));
    assert_eq!(state, snapshot);
}

#[test]
fn share_rules() {
    let (mut f, mut state, _) = run(b"shares", 4, 2, 4);
    let dup = f.share(&state, 1);
    assert_eq!(
        step(&mut state, &dup, VOTE_CLOSE + 50),
        ApplyOutcome::Rejected(RejectReason::DuplicateShareIndex)
    );
    let Transaction::TallyShare { election_id, mut partial, proof } = f.share(&state, 3) else { unreachable!() };
    partial.sigma = (partial.sigma * Integer::from(4)) % f.keys.pk.n_squared();
    let bad = Transaction::TallyShare { election_id, partial, proof };
    assert!(matches!(step(&mut state, &bad, VOTE_CLOSE + 60), ApplyOutcome::Rejected(RejectReason::InvalidProof(_))));
}

#[test]
fn insufficient_shares() {
    let (mut f, state, _) = {
        let mut f = Fixture::new(b"insuff", 3, 4);
        let mut state = LedgerState::new();
        step(&mut state, &f.config_tx(), 0);
        let cred = f.credential();
        step(&mut state, &Fixture::registration(&cred), 1);
        state.advance_phase(REG_CLOSE);
        let tree = state.frozen_tree().unwrap().clone();
        let v = f.vote(&cred, 1, &tree);
        step(&mut state, &v, REG_CLOSE);
        state.advance_phase(VOTE_CLOSE);
        (f, state, ())
    };
    let mut state = state;
    for i in 1..=2 {
        let tx = f.share(&state, i);
        step(&mut state, &tx, VOTE_CLOSE);
    }
    assert_eq!(
        state.finalize_tally(),
        Err(LedgerError::InsufficientShares { needed: 3, got: 2 })
    );
    let tx = f.share(&state, 4);
    step(&mut state, &tx, VOTE_CLOSE);
    assert_eq!(state.finalize_tally().unwrap().yes_count, 1);
}

#[test]
fn compute_sum_is_order_independent() {
    let f = Fixture::new(b"sum", 1, 1);
    let mut rng = rng::from_seed(b"sumr");
    let mut cts: Vec<_> = (0..9)
        .map(|i| encrypt(&f.keys.pk, &Integer::from(u32::from(i % 3 == 0)), &mut rng).unwrap().0)
        .collect();
    let a = crate::hebackend::sum(&f.keys.pk, &cts).unwrap();
    cts.reverse();
    cts.swap(1, 5);
    let b = crate::hebackend::sum(&f.keys.pk, &cts).unwrap();
    assert_eq!(decrypt_direct(&f.keys.secret, &a), 3);
    assert_eq!(decrypt_direct(&f.keys.secret, &b), 3);
    assert_eq!(LedgerState::new().compute_sum(), Err(LedgerError::NoConfig));
}

#[test]
fn replay_is_deterministic_and_matches() {
    let (_, state, _) = run(b"replay", 6, 2, 3);
    let records: Vec<(u64, Transaction)> = state.records().map(|(k, tx)| (k.tick, tx.clone())).collect();
    let (a, outcomes) = replay(records.iter().map(|(t, tx)| (*t, tx)));
    let (b, _) = replay(records.iter().map(|(t, tx)| (*t, tx)));
    assert!(outcomes.iter().all(|o| *o == ApplyOutcome::Applied));
    assert_eq!(a.encode(), b.encode());
    assert_eq!(a.state_hash(), state.state_hash());
    assert_eq!(a.finalize_tally(), state.finalize_tally());
}

#[test]
fn transaction_codec_roundtrip() {
    let (_, state, _) = run(b"codec", 3, 2, 2);
    for (_, tx) in state.records() {
        let bytes = tx.to_bytes();
        assert_eq!(&Transaction::from_bytes(&bytes).unwrap(), tx);
        assert!(Transaction::from_bytes(&bytes[..bytes.len() - 1]).is_err());
    }
}

#[test]
fn dump_roundtrip_and_honest_audit() {
    let (_, state, choices) = run(b"dump", 8, 2, 3);
    let tally = state.finalize_tally().unwrap();
    let dump = LedgerDump::from_state(&state, Some(tally));
    let bytes = dump.encode();
    assert_eq!(&bytes[..8], DUMP_MAGIC);
    assert_eq!(bytes[8], DUMP_VERSION);
    let decoded = LedgerDump::decode(&bytes).unwrap();
    assert!(decoded.integrity_ok);
    assert_eq!(decoded.dump, dump);

    let report = audit(&dump, true);
    assert!(report.passed(), "{}", report.to_text());
    assert_eq!(report.tally.unwrap().yes_count, choices.iter().sum::<u64>());
    assert_eq!(dump.to_text().lines().count(), dump.records.len() + 2);

    assert!(matches!(LedgerDump::decode(&bytes[..bytes.len() - 40]), Err(DumpError::Corrupt(_))));
    assert_eq!(LedgerDump::decode(b"nonsense"), Err(DumpError::BadMagic));
    let mut flipped = bytes.clone();
    flipped[200] ^= 1;
    if let Ok(d) = LedgerDump::decode(&flipped) {
        assert!(!d.integrity_ok);
        assert!(!audit(&d.dump, d.integrity_ok).passed());
    }
}

#[test]
fn audit_flags_stripped_share_and_recombines() {
    let (mut f, mut state, choices) = run(b"strip", 5, 2, 3);
    let extra = f.share(&state, 3);
    assert_eq!(step(&mut state, &extra, VOTE_CLOSE + 9), ApplyOutcome::Applied);
    let tally = state.finalize_tally().unwrap();
    let mut dump = LedgerDump::from_state(&state, Some(tally));
    let share_idx = dump
        .records
        .iter()
        .position(|(_, tx)| matches!(tx, Transaction::TallyShare { .. }))
        .unwrap();
    if let (_, Transaction::TallyShare { proof, .. }) = &mut dump.records[share_idx] {
        proof.clear();
    }
    let report = audit(&dump, true);
    assert!(report.failed_checks().contains(&"share-proofs"));
    assert!(report.failed_checks().contains(&"replay"));
    assert!(!report.failed_checks().contains(&"tally"));
    assert_eq!(report.tally.unwrap().yes_count, choices.iter().sum::<u64>());
}
