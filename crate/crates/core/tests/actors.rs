use sdvote::actors::{
    organizer_setup, participant_publish_share, voter_cast, voter_register, ActorError, SetupParams,
    VoterActor, VoterState,
};
use sdvote::credentials::{CredentialError, IssuerKey, RegistrarState};
use sdvote::hebackend::HeError;
use sdvote::ledger::{PhaseSchedule, RejectReason};
use sdvote::netsim::{NetworkConfig, Simulation};
use sdvote::rng::{self, DeterministicRng};
use sdvote::zkproofs::BackendId;

const REG_CLOSE: u64 = 50;
const VOTE_CLOSE: u64 = 100;

fn params(t: u16, big_n: u16) -> SetupParams {
    SetupParams {
        proposal: "Adopt the proposal?".into(),
        bits: 256,
        t,
        big_n,
        schedule: PhaseSchedule {
            registration_close: REG_CLOSE,
            voting_close: VOTE_CLOSE,
            tally_close: None,
        },
        backend: BackendId::Transparent,
    }
}

struct World {
    sim: Simulation,
    rng: DeterministicRng,
    issuer: IssuerKey,
    registrar: RegistrarState,
}

fn world(seed: &[u8]) -> World {
    let mut rng = rng::from_seed(seed);
    let issuer = IssuerKey::generate(b"idp", &mut rng);
    let mut registrar = RegistrarState::generate(&mut rng);
    registrar.trust_issuer(&issuer.issuer_id, issuer.verifying_key());
    World {
        sim: Simulation::spawn(NetworkConfig::default(), seed).unwrap(),
        rng,
        issuer,
        registrar,
    }
}

#[test]
fn setup_rejects_bad_threshold_and_repeats() {
    let mut w = world(b"setup");
    let vk = w.registrar.verifying_key();
    let err = organizer_setup(&params(4, 3), vk, &mut w.sim, 0, &mut w.rng).err().unwrap();
    assert!(matches!(err, ActorError::Encryption(HeError::InvalidThreshold { t: 4, big_n: 3 })));

    let (org, participants) = organizer_setup(&params(3, 5), vk, &mut w.sim, 0, &mut w.rng).unwrap();
    assert_eq!(participants.len(), 5);
    let indices: std::collections::BTreeSet<_> = participants.iter().map(|p| p.key_share.index).collect();
    assert_eq!(indices.len(), 5);
    w.sim.run_until_quiescent(40);
    for peer in 0..4 {
        assert_eq!(w.sim.ledger(peer).unwrap().config().unwrap().election_id(), org.config.election_id());
    }
    let again = organizer_setup(&params(3, 5), vk, &mut w.sim, 1, &mut w.rng).err().unwrap();
    assert_eq!(again, ActorError::Rejected(RejectReason::ConfigAlreadySet));
}

#[test]
fn voter_lifecycle() {
    let mut w = world(b"lifecycle");
    let vk = w.registrar.verifying_key();
    let (org, participants) = organizer_setup(&params(1, 2), vk, &mut w.sim, 0, &mut w.rng).unwrap();
    let eid = *org.config.election_id();
    w.sim.run_until_quiescent(10);
    w.sim.advance_to(1);

    let mut alice = VoterActor::new(&w.issuer, b"alice", 1, 0).unwrap();
    let mut bob = VoterActor::new(&w.issuer, b"bob", 0, 2).unwrap();
    assert_eq!(
        voter_cast(&mut alice, &org.config, &mut w.sim, &mut w.rng),
        Err(ActorError::WrongState(VoterState::Fresh))
    );
    let cm = voter_register(&mut alice, &mut w.registrar, &eid, &mut w.sim, 1, &mut w.rng).unwrap();
    assert_eq!(alice.state, VoterState::Registered);
    voter_register(&mut bob, &mut w.registrar, &eid, &mut w.sim, 1, &mut w.rng).unwrap();
    assert_eq!(
        voter_register(&mut alice, &mut w.registrar, &eid, &mut w.sim, 1, &mut w.rng),
        Err(ActorError::WrongState(VoterState::Registered))
    );
    let mut clone = VoterActor::new(&w.issuer, b"alice", 0, 1).unwrap();
    assert_eq!(
        voter_register(&mut clone, &mut w.registrar, &eid, &mut w.sim, 1, &mut w.rng),
        Err(ActorError::Credential(CredentialError::DuplicateRegistration))
    );
    w.sim.run_until_quiescent(REG_CLOSE - 10);
    for peer in 0..4 {
        assert!(w.sim.ledger(peer).unwrap().commitments().any(|c| *c == cm));
    }

    w.sim.advance_to(REG_CLOSE);
    let mut late = VoterActor::new(&w.issuer, b"carol", 1, 0).unwrap();
    assert_eq!(
        voter_register(&mut late, &mut w.registrar, &eid, &mut w.sim, 2, &mut w.rng),
        Err(ActorError::Rejected(RejectReason::WrongPhase))
    );

    let nf = voter_cast(&mut alice, &org.config, &mut w.sim, &mut w.rng).unwrap();
    assert_eq!(alice.state, VoterState::Voted);
    assert!(w.sim.ledger(0).unwrap().has_nullifier(&nf));
    voter_cast(&mut bob, &org.config, &mut w.sim, &mut w.rng).unwrap();
    assert_eq!(
        voter_cast(&mut alice, &org.config, &mut w.sim, &mut w.rng),
        Err(ActorError::WrongState(VoterState::Voted))
    );
    // A second ballot built from the same credential is a duplicate nullifier.
    alice.state = VoterState::Registered;
    assert_eq!(
        voter_cast(&mut alice, &org.config, &mut w.sim, &mut w.rng),
        Err(ActorError::Rejected(RejectReason::DuplicateNullifier))
    );
    assert_eq!(
        voter_cast(&mut late, &org.config, &mut w.sim, &mut w.rng),
        Err(ActorError::WrongState(VoterState::Fresh))
    );
    w.sim.run_until_quiescent(VOTE_CLOSE - REG_CLOSE - 10);
    w.sim.advance_to(VOTE_CLOSE);

    participant_publish_share(&participants[0], &org.config, &mut w.sim, &mut w.rng).unwrap();
    // A second share for the same index either loses the conflict or
    // replaces the first; the slot never holds two.
    match participant_publish_share(&participants[0], &org.config, &mut w.sim, &mut w.rng) {
        Ok(()) | Err(ActorError::Rejected(RejectReason::DuplicateShareIndex)) => {}
        other => panic!("{other:?}"),
    }
    assert_eq!(w.sim.ledger(participants[0].home_peer).unwrap().share_count(), 1);
    w.sim.run_until_quiescent(50);
    for peer in 0..4 {
        let t = w.sim.ledger(peer).unwrap().finalize_tally().unwrap();
        assert_eq!((t.yes_count, t.no_count, t.total_votes), (1, 1, 2));
    }
}
