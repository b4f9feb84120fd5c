use rand::Rng;
use serde::Serialize;

use super::{
    organizer_setup, participant_publish_share, run_adversary, build_share, voter_cast,
    voter_register, ActorError, AdversaryScript, ObservedOutcome, SetupParams, TallyParticipant,
    VoterActor,
};
use crate::credentials::{IssuerKey, RegistrarState};
use crate::hebackend::ThresholdKeys;
use crate::ledger::{ElectionConfig, LedgerDump, LedgerError, PhaseSchedule, TallyResult, Transaction};
use crate::netsim::{ConvergenceReport, NetworkConfig, PeerId, Simulation};
use crate::rng;
use crate::zkproofs::BackendId;

/// Who holds the decryption key shares.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShareHolders {
    /// A dedicated committee of `N` participants.
    Committee,
    /// The first `N` registered voters double as participants.
    Voters,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AdversarySpec {
    pub script: AdversaryScript,
    /// Choice used for the adversary's own ballot, where relevant.
    pub choice: u64,
}

#[derive(Clone, Debug)]
pub struct ElectionSpec {
    pub seed: Vec<u8>,
    pub proposal: String,
    pub bits: u32,
    pub t: u16,
    pub big_n: u16,
    /// One entry per honest voter.
    pub choices: Vec<u64>,
    pub network: NetworkConfig,
    pub schedule: PhaseSchedule,
    pub backend: BackendId,
    pub share_holders: ShareHolders,
    /// Participants (by position) that publish a share; `None` means all.
    pub publishing: Option<Vec<usize>>,
    /// Participants that first publish a tampered share.
    pub tampering: Vec<usize>,
    pub adversaries: Vec<AdversarySpec>,
    /// Submissions per tick while registering or voting.
    pub batch: usize,
    /// Upper bound on ticks spent settling each phase.
    pub settle_ticks: u64,
}

impl ElectionSpec {
    /// Defaults around a list of honest choices.
    pub fn new(seed: &[u8], bits: u32, t: u16, big_n: u16, choices: Vec<u64>) -> Self {
        let ballots = choices.len() as u64 + 16;
        Self {
            seed: seed.to_vec(),
            proposal: "Adopt the proposal".into(),
            bits,
            t,
            big_n,
            choices,
            network: NetworkConfig::default(),
            schedule: PhaseSchedule {
                registration_close: 1_000 + ballots,
                voting_close: 2_000 + 2 * ballots,
                tally_close: None,
            },
            backend: BackendId::Transparent,
            share_holders: ShareHolders::Committee,
            publishing: None,
            tampering: Vec::new(),
            adversaries: Vec::new(),
            batch: 25,
            settle_ticks: 500,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PeerTally {
    pub peer: PeerId,
    pub result: Result<TallyResult, String>,
}

pub struct ElectionOutcome {
    pub config: ElectionConfig,
    pub keys: ThresholdKeys,
    /// Tally implied by the ballots that were accepted when cast.
    pub expected_yes: u64,
    pub expected_total: u64,
    pub tallies: Vec<PeerTally>,
    pub convergence: ConvergenceReport,
    pub dump: LedgerDump,
    pub adversaries: Vec<ObservedOutcome>,
    /// Honest voters whose registration or ballot did not land.
    pub failed_voters: Vec<(usize, String)>,
    /// Peers whose ledger is not a serial replay of submitted transactions.
    pub safety_violations: Vec<PeerId>,
    pub trace: String,
}

impl ElectionOutcome {
    /// Every honest peer decrypted the expected tally.
    pub fn tally_matches(&self) -> bool {
        !self.tallies.is_empty()
            && self.tallies.iter().all(|t| {
                matches!(&t.result, Ok(r) if r.yes_count == self.expected_yes && r.total_votes == self.expected_total)
            })
    }

    pub fn first_tally(&self) -> Option<&TallyResult> {
        self.tallies.iter().find_map(|t| t.result.as_ref().ok())
    }
}

struct Runner {
    sim: Simulation,
    rng: rng::DeterministicRng,
    settle: u64,
}

impl Runner {
    /// Let the network settle without crossing `boundary`.
    fn settle_before(&mut self, boundary: u64) {
        let room = boundary.saturating_sub(self.sim.now() + 1);
        self.sim.run_until_quiescent(room.min(self.settle));
    }

    fn tick(&mut self) {
        let next = self.sim.now() + 1;
        self.sim.advance_to(next);
    }
}

fn pid(seed: &[u8], i: usize) -> Vec<u8> {
    let mut p = seed.to_vec();
    p.extend_from_slice(format!("/person/{i}").as_bytes());
    p
}

fn issuance_time(tick: u64) -> u64 {
    1_700_000_000 + tick
}

/// Run a full election: setup, registration, voting with scripted
/// adversaries, share publication, and a tally on every honest peer.
pub fn run_election(spec: &ElectionSpec) -> Result<ElectionOutcome, ActorError> {
    let mut runner = Runner {
        sim: Simulation::spawn(spec.network.clone(), &spec.seed)?,
        rng: rng::derive(&spec.seed, "actors"),
        settle: spec.settle_ticks,
    };
    let schedule = spec.schedule;
    let honest_peers: Vec<PeerId> = runner.sim.honest_peers().collect();
    if honest_peers.is_empty() {
        return Err(crate::netsim::SimError::InvalidConfig("no honest peer").into());
    }
    let home = |i: usize| honest_peers[i % honest_peers.len()];

    let issuer = IssuerKey::generate(b"issuer", &mut runner.rng);
    let mut registrar = RegistrarState::generate(&mut runner.rng);
    registrar.trust_issuer(&issuer.issuer_id, issuer.verifying_key());

    let params = SetupParams {
        proposal: spec.proposal.clone(),
        bits: spec.bits,
        t: spec.t,
        big_n: spec.big_n,
        schedule,
        backend: spec.backend,
    };
    let mut key_rng = rng::derive(&spec.seed, "keys");
    let (organizer, mut participants) =
        organizer_setup(&params, registrar.verifying_key(), &mut runner.sim, home(0), &mut key_rng)?;
    let config = organizer.config.clone();
    let eid = *config.election_id();

    let mut voters = spec
        .choices
        .iter()
        .enumerate()
        .map(|(i, &choice)| VoterActor::new(&issuer, &pid(&spec.seed, i), choice, home(i)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut adversaries = spec
        .adversaries
        .iter()
        .enumerate()
        .map(|(k, a)| {
            VoterActor::new(&issuer, &pid(&spec.seed, 1_000_000 + k), a.choice, home(k + 1))
        })
        .collect::<Result<Vec<_>, _>>()?;
    match spec.share_holders {
        ShareHolders::Committee => {
            for (i, p) in participants.iter_mut().enumerate() {
                p.home_peer = home(i);
            }
        }
        ShareHolders::Voters => {
            for (i, p) in participants.iter_mut().enumerate() {
                p.home_peer = voters.get(i).map(|v| v.home_peer).unwrap_or(home(i));
            }
        }
    }

    runner.settle_before(schedule.registration_close);
    runner.sim.advance_to(1.max(runner.sim.now()));

    // Registration.
    let mut failed_voters = Vec::new();
    let mut observed = Vec::new();
    for (i, voter) in voters.iter_mut().enumerate() {
        if i > 0 && i % spec.batch.max(1) == 0 {
            runner.tick();
        }
        let ts = issuance_time(runner.sim.now());
        if let Err(e) = voter_register(voter, &mut registrar, &eid, &mut runner.sim, ts, &mut runner.rng) {
            failed_voters.push((i, e.to_string()));
        }
    }
    for (spec_a, adv) in spec.adversaries.iter().zip(adversaries.iter_mut()) {
        let ts = issuance_time(runner.sim.now());
        if spec_a.script.needs_registration() {
            voter_register(adv, &mut registrar, &eid, &mut runner.sim, ts, &mut runner.rng)?;
        }
        if spec_a.script.acts_in_registration() {
            observed.push(run_adversary(
                spec_a.script,
                adv,
                None,
                &mut registrar,
                &config,
                &mut runner.sim,
                ts,
                &mut runner.rng,
            )?);
        }
    }
    runner.settle_before(schedule.registration_close);
    runner.sim.advance_to(schedule.registration_close);

    // Voting.
    let mut expected_yes = 0u64;
    let mut expected_total = 0u64;
    for (i, voter) in voters.iter_mut().enumerate() {
        if i > 0 && i % spec.batch.max(1) == 0 {
            runner.tick();
        }
        if voter.credential.is_none() || failed_voters.iter().any(|(j, _)| *j == i) {
            continue;
        }
        match voter_cast(voter, &config, &mut runner.sim, &mut runner.rng) {
            Ok(_) => {
                expected_yes += voter.choice;
                expected_total += 1;
            }
            Err(e) => failed_voters.push((i, e.to_string())),
        }
    }
    runner.settle_before(schedule.voting_close);
    for (spec_a, adv) in spec.adversaries.iter().zip(adversaries.iter_mut()) {
        if spec_a.script.acts_in_registration() {
            continue;
        }
        let ts = issuance_time(runner.sim.now());
        let victim = voters.iter().find(|v| v.last_vote.is_some());
        observed.push(run_adversary(
            spec_a.script,
            adv,
            victim,
            &mut registrar,
            &config,
            &mut runner.sim,
            ts,
            &mut runner.rng,
        )?);
    }
    runner.settle_before(schedule.voting_close);
    for o in &mut observed {
        o.settle(&runner.sim);
        if o.script == AdversaryScript::DoubleVote {
            if let Some(choice) = o.counted_choice() {
                expected_yes += choice;
                expected_total += 1;
            }
        }
    }
    runner.sim.advance_to(schedule.voting_close);

    // Tally.
    let publishing: Vec<usize> = spec
        .publishing
        .clone()
        .unwrap_or_else(|| (0..participants.len()).collect());
    let tally_deadline = schedule.tally_close.unwrap_or(u64::MAX);
    for &k in &publishing {
        let Some(p) = participants.get(k) else { continue };
        if spec.tampering.contains(&k) {
            publish_tampered(p, &config, &mut runner)?;
        }
        if expected_total > 0 {
            participant_publish_share(p, &config, &mut runner.sim, &mut runner.rng)?;
        }
    }
    runner.settle_before(tally_deadline);

    let tallies = runner
        .sim
        .honest_peers()
        .map(|peer| PeerTally {
            peer,
            result: runner
                .sim
                .ledger(peer)
                .map_err(|e| e.to_string())
                .and_then(|l| l.finalize_tally().map_err(|e: LedgerError| e.to_string())),
        })
        .collect::<Vec<_>>();
    let convergence = runner.sim.report();
    let dump_peer = honest_peers[0];
    let claim = tallies
        .iter()
        .find(|t| t.peer == dump_peer)
        .and_then(|t| t.result.clone().ok());
    let dump = LedgerDump::from_state(runner.sim.ledger(dump_peer)?, claim);
    Ok(ElectionOutcome {
        config,
        keys: organizer.keys,
        expected_yes,
        expected_total,
        tallies,
        convergence,
        dump,
        adversaries: observed,
        failed_voters,
        safety_violations: runner.sim.safety_violations(),
        trace: runner.sim.trace_lines(),
    })
}

/// Publish a share whose partial decryption was altered after proving.
fn publish_tampered(p: &TallyParticipant, config: &ElectionConfig, runner: &mut Runner) -> Result<(), ActorError> {
    let tx = build_share(p, config, &runner.sim, &mut runner.rng)?;
    let Transaction::TallyShare { election_id, mut partial, proof } = tx else { unreachable!() };
    let bump: u32 = runner.rng.gen_range(2..1000);
    partial.sigma = (partial.sigma * bump) % config.pk.n_squared();
    let tx = Transaction::TallyShare { election_id, partial, proof };
    // A rejection here is the expected outcome.
    let _ = runner.sim.submit(p.home_peer, tx)?;
    Ok(())
}
