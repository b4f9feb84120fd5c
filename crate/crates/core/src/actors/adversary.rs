use rand::{CryptoRng, RngCore};
use rug::Integer;
use serde::Serialize;

use super::{build_vote, ActorError, VoterActor};
use crate::credentials::{present, RegistrarState};
use crate::hash::{self, Hash32};
use crate::hebackend::encrypt_with;
use crate::ledger::{ElectionConfig, Transaction};
use crate::netsim::{Simulation, SubmitResult};
use crate::zkproofs::{decode_transparent, encode_transparent, VoteProof};

/// Scripted misbehavior by an otherwise eligible voter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AdversaryScript {
    /// Two conflicting ballots under one nullifier, submitted at two peers
    /// in the same tick.
    DoubleVote,
    /// A second registration attempt with the same eligibility credential.
    ReRegisterSamePid,
    /// A valid presentation attached to a commitment it does not vouch for.
    ForeignCommitment,
    /// A ballot encrypting 2.
    InvalidChoice,
    /// Resubmission of another voter's ballot.
    ReplayForeignVote,
}

impl AdversaryScript {
    pub fn name(self) -> &'static str {
        match self {
            AdversaryScript::DoubleVote => "double_vote",
            AdversaryScript::ReRegisterSamePid => "re_register_same_pid",
            AdversaryScript::ForeignCommitment => "foreign_commitment",
            AdversaryScript::InvalidChoice => "invalid_choice",
            AdversaryScript::ReplayForeignVote => "replay_foreign_vote",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            AdversaryScript::DoubleVote,
            AdversaryScript::ReRegisterSamePid,
            AdversaryScript::ForeignCommitment,
            AdversaryScript::InvalidChoice,
            AdversaryScript::ReplayForeignVote,
        ]
        .into_iter()
        .find(|a| a.name() == s)
    }

    /// Whether the script acts during registration (otherwise voting).
    pub fn acts_in_registration(self) -> bool {
        matches!(self, AdversaryScript::ReRegisterSamePid | AdversaryScript::ForeignCommitment)
    }

    /// Whether the adversary must hold an accepted registration first.
    pub fn needs_registration(self) -> bool {
        !matches!(self, AdversaryScript::ForeignCommitment)
    }

    /// Reason every honest peer or the registrar is expected to give.
    pub fn expected(self) -> &'static str {
        match self {
            AdversaryScript::DoubleVote => "exactly one ballot per nullifier",
            AdversaryScript::ReRegisterSamePid => "person already registered for this election",
            AdversaryScript::ForeignCommitment => {
                "commitment does not match the presented credential"
            }
            AdversaryScript::InvalidChoice => "constraint C3 (encryption) violated",
            AdversaryScript::ReplayForeignVote => "duplicate",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ObservedOutcome {
    pub script: AdversaryScript,
    /// Rejection reasons observed at the registrar or the home peer.
    pub reasons: Vec<String>,
    #[serde(skip)]
    pub transactions: Vec<(Hash32, Option<u64>)>,
    /// For each submitted transaction, how many honest peers hold it.
    pub honest_copies: Vec<usize>,
    pub honest_peers: usize,
    pub as_expected: bool,
}

fn describe(result: &SubmitResult) -> String {
    match result {
        SubmitResult::Ledger(crate::ledger::ApplyOutcome::Rejected(r)) => r.to_string(),
        SubmitResult::Ledger(_) => "accepted".into(),
        SubmitResult::AlreadySeen => "duplicate: already seen".into(),
        SubmitResult::Swallowed => "swallowed".into(),
    }
}

/// Execute `script` for the adversarial voter `adv`. `victim` supplies the
/// ballot for replay. Network-wide effects are filled in by [`settle`].
///
/// [`settle`]: ObservedOutcome::settle
#[allow(clippy::too_many_arguments)]
pub fn run_adversary<R: RngCore + CryptoRng>(
    script: AdversaryScript,
    adv: &mut VoterActor,
    victim: Option<&VoterActor>,
    registrar: &mut RegistrarState,
    config: &ElectionConfig,
    sim: &mut Simulation,
    issuance_time: u64,
    rng: &mut R,
) -> Result<ObservedOutcome, ActorError> {
    let mut reasons = Vec::new();
    let mut transactions = Vec::new();
    let eid = config.election_id();
    match script {
        AdversaryScript::ReRegisterSamePid => {
            if let Err(e) = registrar.register(&adv.vc, eid, issuance_time, rng) {
                reasons.push(e.to_string());
            }
        }
        AdversaryScript::ForeignCommitment => {
            let credential = registrar.register(&adv.vc, eid, issuance_time, rng)?;
            let mut fake_secret = [0u8; 32];
            rng.fill_bytes(&mut fake_secret);
            let tx = Transaction::Registration {
                commitment: hash::commitment(&fake_secret),
                presentation: present(&credential),
            };
            transactions.push((tx.hash(), None));
            reasons.push(describe(&sim.submit(adv.home_peer, tx)?));
            adv.credential = Some(credential);
        }
        AdversaryScript::DoubleVote => {
            let credential = adv.credential.clone().ok_or(ActorError::MerklePathUnavailable)?;
            let peers = sim.peer_count();
            for (k, choice) in [adv.choice, 1 - adv.choice.min(1)].into_iter().enumerate() {
                let tx = build_vote(&credential, choice, config, sim, adv.home_peer, rng)?;
                transactions.push((tx.hash(), Some(choice)));
                let peer = (adv.home_peer + k) % peers;
                reasons.push(describe(&sim.submit(peer, tx)?));
            }
        }
        AdversaryScript::InvalidChoice => {
            let credential = adv.credential.clone().ok_or(ActorError::MerklePathUnavailable)?;
            // Take an honest proof and swap in an encryption of 2 under the
            // same randomizer.
            let honest = build_vote(&credential, 0, config, sim, adv.home_peer, rng)?;
            let Transaction::Vote { nullifier, proof, .. } = honest else { unreachable!() };
            let (mut witness, enc) = decode_transparent(&config.pk, &proof.payload)
                .map_err(|e| crate::zkproofs::ProofError::MalformedPayload(e.to_string()))?;
            witness.choice = 2;
            let c2 = encrypt_with(&config.pk, &Integer::from(2), &witness.randomizer)?;
            let tx = Transaction::Vote {
                election_id: *eid,
                ciphertext: c2,
                nullifier,
                proof: VoteProof {
                    backend: proof.backend,
                    payload: encode_transparent(&config.pk, &witness, &enc),
                },
            };
            transactions.push((tx.hash(), Some(2)));
            reasons.push(describe(&sim.submit(adv.home_peer, tx)?));
        }
        AdversaryScript::ReplayForeignVote => {
            let tx = victim
                .and_then(|v| v.last_vote.clone())
                .ok_or(ActorError::MerklePathUnavailable)?;
            transactions.push((tx.hash(), None));
            reasons.push(describe(&sim.submit(adv.home_peer, tx)?));
        }
    }
    Ok(ObservedOutcome {
        script,
        reasons,
        transactions,
        honest_copies: Vec::new(),
        honest_peers: 0,
        as_expected: false,
    })
}

impl ObservedOutcome {
    /// Record network-wide acceptance after the network has settled and
    /// judge the outcome against the script's expected rejection.
    pub fn settle(&mut self, sim: &Simulation) {
        let honest: Vec<_> = sim.honest_peers().collect();
        self.honest_peers = honest.len();
        self.honest_copies = self
            .transactions
            .iter()
            .map(|(h, _)| {
                honest
                    .iter()
                    .filter(|&&p| {
                        sim.ledger(p)
                            .map(|l| l.records().any(|(k, _)| k.hash == *h))
                            .unwrap_or(false)
                    })
                    .count()
            })
            .collect();
        let n = self.honest_peers;
        let reason_seen = |needle: &str| self.reasons.iter().any(|r| r.contains(needle));
        self.as_expected = match self.script {
            AdversaryScript::DoubleVote => {
                let mut copies = self.honest_copies.clone();
                copies.sort_unstable();
                copies == [0, n]
            }
            AdversaryScript::ReRegisterSamePid => reason_seen(self.script.expected()),
            AdversaryScript::ForeignCommitment | AdversaryScript::InvalidChoice => {
                reason_seen(self.script.expected()) && self.honest_copies.iter().all(|&c| c == 0)
            }
            // The replayed ballot is the victim's own; it counts once.
            AdversaryScript::ReplayForeignVote => {
                reason_seen(self.script.expected()) || reason_seen("duplicate nullifier")
            }
        };
    }

    /// The choice that won a double vote, if any.
    pub fn counted_choice(&self) -> Option<u64> {
        self.transactions
            .iter()
            .zip(&self.honest_copies)
            .find(|(_, &c)| c > 0)
            .and_then(|((_, choice), _)| *choice)
    }
}
