//! Protocol roles driving a simulated election.

mod adversary;
mod runner;

use std::collections::BTreeMap;

use rand::{CryptoRng, RngCore};
use rug::Integer;
use thiserror::Error;

use crate::credentials::{
    issuer_issue_vc, present, Credential, CredentialError, EligibilityVC, IssuerKey, RegistrarState,
};
use crate::hash::{self, Hash32};
use crate::hebackend::{
    encrypt, keygen, partial_decrypt, HeError, KeyShare, PaillierPublicKey, ThresholdKeys,
};
use crate::ledger::{ConfigError, ElectionConfig, PhaseSchedule, RejectReason, Transaction};
use crate::netsim::{PeerId, SimError, Simulation, SubmitResult};
use crate::zkproofs::{prove_share, prove_vote, BackendId, ProofError, VoteStatement, VoteWitness};

pub use adversary::{run_adversary, AdversaryScript, ObservedOutcome};
pub use runner::{
    run_election, AdversarySpec, ElectionOutcome, ElectionSpec, PeerTally, ShareHolders,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ActorError {
    #[error(transparent)]
    Credential(#[from] CredentialError),
    #[error(transparent)]
    Encryption(#[from] HeError),
    #[error(transparent)]
    Proof(#[from] ProofError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Network(#[from] SimError),
    #[error("ledger rejected the transaction: {0}")]
    Rejected(RejectReason),
    #[error("home peer already saw this transaction")]
    AlreadySeen,
    #[error("home peer swallowed the transaction")]
    Swallowed,
    #[error("commitment is not in the frozen tree")]
    MerklePathUnavailable,
    #[error("actor is in state {0:?}")]
    WrongState(VoterState),
    #[error("election has no ballots to tally")]
    NothingToTally,
}

fn submitted(result: SubmitResult) -> Result<(), ActorError> {
    match result {
        SubmitResult::Ledger(o) if o.is_accepted() => Ok(()),
        SubmitResult::Ledger(crate::ledger::ApplyOutcome::Rejected(r)) => Err(ActorError::Rejected(r)),
        SubmitResult::Ledger(_) => unreachable!(),
        SubmitResult::AlreadySeen => Err(ActorError::AlreadySeen),
        SubmitResult::Swallowed => Err(ActorError::Swallowed),
    }
}

/// Election parameters chosen by the organizer.
#[derive(Clone, Debug)]
pub struct SetupParams {
    pub proposal: String,
    pub bits: u32,
    pub t: u16,
    pub big_n: u16,
    pub schedule: PhaseSchedule,
    pub backend: BackendId,
}

/// Organizer output: the published configuration and the dealt keys.
pub struct Organizer {
    pub config: ElectionConfig,
    pub keys: ThresholdKeys,
}

#[derive(Clone, Debug)]
pub struct TallyParticipant {
    pub key_share: KeyShare,
    pub home_peer: PeerId,
}

/// Generate keys, publish the configuration, and deal one share per
/// participant (home peers assigned round-robin).
pub fn organizer_setup<R: RngCore + CryptoRng>(
    params: &SetupParams,
    registrar_pk: ed25519_dalek::VerifyingKey,
    sim: &mut Simulation,
    home_peer: PeerId,
    rng: &mut R,
) -> Result<(Organizer, Vec<TallyParticipant>), ActorError> {
    let keys = keygen(params.bits, params.t, params.big_n, rng)?;
    let mut nonce = [0u8; 16];
    rng.fill_bytes(&mut nonce);
    let config = ElectionConfig::new(
        params.proposal.clone(),
        nonce,
        keys.pk.clone(),
        keys.params.clone(),
        registrar_pk,
        params.backend,
        params.schedule,
    )?;
    submitted(sim.submit(home_peer, Transaction::Config(Box::new(config.clone())))?)?;
    let peers = sim.peer_count();
    let participants = keys
        .shares
        .iter()
        .enumerate()
        .map(|(i, share)| TallyParticipant {
            key_share: share.clone(),
            home_peer: i % peers,
        })
        .collect();
    Ok((Organizer { config, keys }, participants))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VoterState {
    Fresh,
    Registered,
    Voted,
}

#[derive(Clone, Debug)]
pub struct VoterActor {
    pub vc: EligibilityVC,
    pub credential: Option<Credential>,
    pub choice: u64,
    pub home_peer: PeerId,
    pub state: VoterState,
    /// Last vote transaction submitted.
    pub last_vote: Option<Transaction>,
}

impl VoterActor {
    pub fn new(issuer: &IssuerKey, pid: &[u8], choice: u64, home_peer: PeerId) -> Result<Self, ActorError> {
        let attributes = BTreeMap::from([("eligible".to_string(), "true".to_string())]);
        Ok(Self {
            vc: issuer_issue_vc(issuer, pid, attributes)?,
            credential: None,
            choice,
            home_peer,
            state: VoterState::Fresh,
            last_vote: None,
        })
    }
}

/// Full registration flow; returns the commitment placed on the ledger.
pub fn voter_register<R: RngCore + CryptoRng>(
    actor: &mut VoterActor,
    registrar: &mut RegistrarState,
    election_id: &Hash32,
    sim: &mut Simulation,
    issuance_time: u64,
    rng: &mut R,
) -> Result<Hash32, ActorError> {
    if actor.state != VoterState::Fresh {
        return Err(ActorError::WrongState(actor.state));
    }
    let credential = match &actor.credential {
        Some(c) => c.clone(),
        None => {
            let c = registrar.register(&actor.vc, election_id, issuance_time, rng)?;
            actor.credential = Some(c.clone());
            c
        }
    };
    let cm = credential.commitment();
    let tx = Transaction::Registration {
        commitment: cm,
        presentation: present(&credential),
    };
    submitted(sim.submit(actor.home_peer, tx)?)?;
    actor.state = VoterState::Registered;
    Ok(cm)
}

/// Build a vote transaction for `choice` against the home peer's frozen tree.
pub fn build_vote<R: RngCore + CryptoRng>(
    credential: &Credential,
    choice: u64,
    config: &ElectionConfig,
    sim: &Simulation,
    home_peer: PeerId,
    rng: &mut R,
) -> Result<Transaction, ActorError> {
    let tree = sim
        .ledger(home_peer)?
        .frozen_tree()
        .ok_or(ActorError::MerklePathUnavailable)?;
    let cm = credential.commitment();
    let path = tree.path_for(&cm).ok_or(ActorError::MerklePathUnavailable)?;
    let pk: &PaillierPublicKey = &config.pk;
    let (c, r) = encrypt(pk, &Integer::from(choice), rng)?;
    let eid = *config.election_id();
    let nullifier = hash::vote_nullifier(&credential.secret_id, &eid);
    let witness = VoteWitness {
        secret_id: credential.secret_id,
        choice,
        randomizer: r,
        merkle_path: path,
    };
    let stmt = VoteStatement {
        election_id: eid,
        merkle_root: tree.root(),
        nullifier,
        ciphertext: &c,
        pk,
    };
    let proof = prove_vote(config.vote_backend, &stmt, &witness, rng)?;
    Ok(Transaction::Vote {
        election_id: eid,
        ciphertext: c,
        nullifier,
        proof,
    })
}

/// Cast the actor's ballot; returns the vote nullifier.
pub fn voter_cast<R: RngCore + CryptoRng>(
    actor: &mut VoterActor,
    config: &ElectionConfig,
    sim: &mut Simulation,
    rng: &mut R,
) -> Result<Hash32, ActorError> {
    if actor.state != VoterState::Registered {
        return Err(ActorError::WrongState(actor.state));
    }
    let credential = actor.credential.as_ref().expect("registered voters hold a credential");
    let tx = build_vote(credential, actor.choice, config, sim, actor.home_peer, rng)?;
    let Transaction::Vote { nullifier, .. } = &tx else { unreachable!() };
    let nf = *nullifier;
    actor.last_vote = Some(tx.clone());
    submitted(sim.submit(actor.home_peer, tx)?)?;
    actor.state = VoterState::Voted;
    Ok(nf)
}

/// Build a share transaction over the home peer's ballot sum.
pub fn build_share<R: RngCore + CryptoRng>(
    p: &TallyParticipant,
    config: &ElectionConfig,
    sim: &Simulation,
    rng: &mut R,
) -> Result<Transaction, ActorError> {
    let c_sum = sim
        .ledger(p.home_peer)?
        .compute_sum()
        .map_err(|_| ActorError::NothingToTally)?;
    let partial = partial_decrypt(&config.pk, &p.key_share, &config.params, &c_sum);
    let proof = prove_share(&config.pk, &p.key_share, &config.params, &c_sum, &partial, rng)?;
    Ok(Transaction::TallyShare {
        election_id: *config.election_id(),
        partial,
        proof: proof.to_bytes(&config.pk, &config.params),
    })
}

pub fn participant_publish_share<R: RngCore + CryptoRng>(
    p: &TallyParticipant,
    config: &ElectionConfig,
    sim: &mut Simulation,
    rng: &mut R,
) -> Result<(), ActorError> {
    let tx = build_share(p, config, sim, rng)?;
    submitted(sim.submit(p.home_peer, tx)?)
}
