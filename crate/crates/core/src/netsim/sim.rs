use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

use rand::seq::index::sample;
use rand::Rng;

use super::{
    Byzantine, ConvergenceReport, NetworkConfig, PeerId, PeerSummary, SimError, SubmitResult,
    TraceEvent, TraceKind,
};
use crate::hash::Hash32;
use crate::ledger::{replay, ApplyOutcome, LedgerState, RecordKey, RejectReason, Transaction, TxKind};
use crate::rng::{self, DeterministicRng};

/// Relays per transaction from a duplicate-replaying peer.
const REPLAY_LIMIT: u32 = 2;

#[derive(Debug)]
struct Peer {
    ledger: LedgerState,
    seen: HashSet<Hash32>,
    /// Transactions rejected for reasons that cannot change later.
    rejected: HashSet<Hash32>,
    behavior: Option<Byzantine>,
    replays: HashMap<Hash32, u32>,
}

impl Peer {
    fn censors(&self, kind: TxKind) -> bool {
        matches!(
            (self.behavior, kind),
            (Some(Byzantine::CensorVotes), TxKind::Vote)
                | (Some(Byzantine::CensorRegistrations), TxKind::Registration)
        )
    }

    fn silent(&self) -> bool {
        self.behavior == Some(Byzantine::Silent)
    }

    fn apply(&mut self, tx: &Transaction, hash: Hash32, origin: u64, now: u64) -> ApplyOutcome {
        self.ledger.advance_phase(now);
        let outcome = self.ledger.apply(tx, origin);
        if let ApplyOutcome::Rejected(reason) = &outcome {
            if !matches!(reason, RejectReason::UnknownElection | RejectReason::WrongPhase) {
                self.rejected.insert(hash);
            }
        }
        outcome
    }
}

#[derive(Debug)]
enum Event {
    Deliver {
        to: PeerId,
        from: PeerId,
        tx: Arc<Transaction>,
        hash: Hash32,
        origin: u64,
    },
    SyncBatch {
        to: PeerId,
        from: PeerId,
        records: Vec<(RecordKey, Transaction)>,
    },
    SyncRound,
    PartitionMark { window: usize, start: bool },
}

impl Event {
    fn is_message(&self) -> bool {
        matches!(self, Event::Deliver { .. } | Event::SyncBatch { .. })
    }
}

/// A network of ledger replicas driven by one event queue.
pub struct Simulation {
    config: NetworkConfig,
    peers: Vec<Peer>,
    now: u64,
    queue: BTreeMap<(u64, u64), Event>,
    seq: u64,
    in_flight: usize,
    rng: DeterministicRng,
    trace: Vec<TraceEvent>,
    submitted: HashSet<Hash32>,
    sent: u64,
    dropped: u64,
}

impl Simulation {
    pub fn spawn(config: NetworkConfig, seed: &[u8]) -> Result<Self, SimError> {
        config.validate()?;
        let peers = (0..config.peer_count)
            .map(|id| Peer {
                ledger: LedgerState::new(),
                seen: HashSet::new(),
                rejected: HashSet::new(),
                behavior: config.byzantine.get(&id).copied(),
                replays: HashMap::new(),
            })
            .collect();
        let mut sim = Self {
            peers,
            now: 0,
            queue: BTreeMap::new(),
            seq: 0,
            in_flight: 0,
            rng: rng::derive(seed, "netsim"),
            trace: Vec::new(),
            submitted: HashSet::new(),
            sent: 0,
            dropped: 0,
            config,
        };
        if sim.config.sync_interval > 0 {
            sim.schedule(sim.config.sync_interval, Event::SyncRound);
        }
        for i in 0..sim.config.partitions.len() {
            let w = &sim.config.partitions[i];
            if w.start < w.end {
                let (s, e) = (w.start, w.end);
                sim.schedule(s, Event::PartitionMark { window: i, start: true });
                sim.schedule(e, Event::PartitionMark { window: i, start: false });
            }
        }
        Ok(sim)
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    pub fn now(&self) -> u64 {
        self.now
    }

    pub fn peer_count(&self) -> usize {
        self.peers.len()
    }

    pub fn is_honest(&self, peer: PeerId) -> bool {
        self.peers.get(peer).is_some_and(|p| p.behavior.is_none())
    }

    pub fn honest_peers(&self) -> impl Iterator<Item = PeerId> + '_ {
        (0..self.peers.len()).filter(|&p| self.is_honest(p))
    }

    pub fn ledger(&self, peer: PeerId) -> Result<&LedgerState, SimError> {
        self.peers
            .get(peer)
            .map(|p| &p.ledger)
            .ok_or(SimError::UnknownPeer(peer))
    }

    pub fn trace(&self) -> &[TraceEvent] {
        &self.trace
    }

    /// Line-delimited trace: `tick peer event tx-hash`.
    pub fn trace_lines(&self) -> String {
        self.trace.iter().map(|e| format!("{e}\n")).collect()
    }

    /// Cut links between `side` and everyone else during `[start, end)`.
    pub fn inject_partition(&mut self, side: impl IntoIterator<Item = PeerId>, start: u64, end: u64) -> Result<(), SimError> {
        let side: std::collections::BTreeSet<PeerId> = side.into_iter().collect();
        if let Some(&bad) = side.iter().find(|&&p| p >= self.peers.len()) {
            return Err(SimError::UnknownPeer(bad));
        }
        let start = start.max(self.now);
        let end = end.max(start);
        self.config.partitions.push(super::PartitionWindow { start, end, side });
        let i = self.config.partitions.len() - 1;
        if start < end {
            self.schedule(start, Event::PartitionMark { window: i, start: true });
            self.schedule(end, Event::PartitionMark { window: i, start: false });
        }
        Ok(())
    }

    /// End every partition still open at `tick`.
    pub fn heal(&mut self, tick: u64) {
        let tick = tick.max(self.now);
        for w in &mut self.config.partitions {
            if w.end > tick {
                w.end = tick.max(w.start);
            }
        }
    }

    fn partitioned(&self, a: PeerId, b: PeerId, tick: u64) -> bool {
        self.config.partitions.iter().any(|w| w.separates(a, b, tick))
    }

    fn schedule(&mut self, tick: u64, event: Event) {
        if event.is_message() {
            self.in_flight += 1;
        }
        self.queue.insert((tick, self.seq), event);
        self.seq += 1;
    }

    fn record(&mut self, peer: PeerId, kind: TraceKind, tx: Option<Hash32>) {
        if self.config.trace {
            self.trace.push(TraceEvent {
                tick: self.now,
                peer,
                kind,
                tx,
            });
        }
    }

    fn record_outcome(&mut self, peer: PeerId, outcome: &ApplyOutcome, hash: Hash32, synced: bool) {
        let kind = match outcome {
            ApplyOutcome::Applied if synced => TraceKind::Synced,
            ApplyOutcome::Applied => TraceKind::Applied,
            ApplyOutcome::Superseded { .. } => TraceKind::Superseded,
            ApplyOutcome::Rejected(_) => TraceKind::Rejected,
        };
        self.record(peer, kind, Some(hash));
    }

    fn latency(&mut self) -> u64 {
        let (lo, hi) = self.config.latency;
        self.rng.gen_range(lo..=hi)
    }

    /// Returns false if the message was lost.
    fn transmit(&mut self, from: PeerId, hash: Option<Hash32>) -> bool {
        self.sent += 1;
        if self.config.drop_rate > 0.0 && self.rng.gen_bool(self.config.drop_rate) {
            self.dropped += 1;
            self.record(from, TraceKind::Dropped, hash);
            return false;
        }
        true
    }

    fn relay(&mut self, from: PeerId, tx: &Arc<Transaction>, hash: Hash32, origin: u64) {
        if self.peers[from].silent() || self.peers.len() < 2 {
            return;
        }
        let others = self.peers.len() - 1;
        let picks = sample(&mut self.rng, others, self.config.fanout.min(others));
        for i in picks.iter() {
            let to = if i >= from { i + 1 } else { i };
            if self.transmit(from, Some(hash)) {
                let at = self.now + self.latency();
                self.schedule(
                    at,
                    Event::Deliver {
                        to,
                        from,
                        tx: Arc::clone(tx),
                        hash,
                        origin,
                    },
                );
            }
        }
    }

    /// Hand a transaction to its home peer at the current tick. The home
    /// peer applies it immediately and gossips it if accepted.
    pub fn submit(&mut self, peer: PeerId, tx: Transaction) -> Result<SubmitResult, SimError> {
        if peer >= self.peers.len() {
            return Err(SimError::UnknownPeer(peer));
        }
        let hash = tx.hash();
        self.submitted.insert(hash);
        self.record(peer, TraceKind::Submit, Some(hash));
        let now = self.now;
        let p = &mut self.peers[peer];
        if p.censors(tx.kind()) {
            p.seen.insert(hash);
            self.record(peer, TraceKind::Censored, Some(hash));
            return Ok(SubmitResult::Swallowed);
        }
        if !p.seen.insert(hash) {
            self.record(peer, TraceKind::Duplicate, Some(hash));
            return Ok(SubmitResult::AlreadySeen);
        }
        let outcome = p.apply(&tx, hash, now, now);
        self.record_outcome(peer, &outcome, hash, false);
        let replayer = self.peers[peer].behavior == Some(Byzantine::ReplayDuplicates);
        if outcome.is_accepted() || replayer {
            self.relay(peer, &Arc::new(tx), hash, now);
        }
        Ok(SubmitResult::Ledger(outcome))
    }

    fn deliver(&mut self, to: PeerId, from: PeerId, tx: Arc<Transaction>, hash: Hash32, origin: u64) {
        if self.partitioned(from, to, self.now) {
            self.record(to, TraceKind::Partitioned, Some(hash));
            return;
        }
        let now = self.now;
        let p = &mut self.peers[to];
        if p.behavior == Some(Byzantine::ReplayDuplicates) {
            let count = p.replays.entry(hash).or_insert(0);
            if *count < REPLAY_LIMIT {
                *count += 1;
                if !p.seen.insert(hash) {
                    self.record(to, TraceKind::Duplicate, Some(hash));
                } else {
                    let outcome = p.apply(&tx, hash, origin, now);
                    self.record_outcome(to, &outcome, hash, false);
                }
                self.relay(to, &tx, hash, origin);
                return;
            }
        }
        let p = &mut self.peers[to];
        if !p.seen.insert(hash) {
            self.record(to, TraceKind::Duplicate, Some(hash));
            return;
        }
        if p.censors(tx.kind()) {
            self.record(to, TraceKind::Censored, Some(hash));
            return;
        }
        let outcome = p.apply(&tx, hash, origin, now);
        self.record_outcome(to, &outcome, hash, false);
        if outcome.is_accepted() {
            self.relay(to, &tx, hash, origin);
        }
    }

    fn sync_round(&mut self) {
        for p in 0..self.peers.len() {
            if self.peers[p].silent() || self.peers.len() < 2 {
                continue;
            }
            let mut q = self.rng.gen_range(0..self.peers.len() - 1);
            if q >= p {
                q += 1;
            }
            if self.peers[q].silent() || self.partitioned(p, q, self.now) {
                continue;
            }
            let (requester, responder) = (&self.peers[p], &self.peers[q]);
            let records: Vec<(RecordKey, Transaction)> = responder
                .ledger
                .records()
                .filter(|(key, tx)| {
                    !requester.ledger.contains(key)
                        && !requester.rejected.contains(&key.hash)
                        && !responder.censors(tx.kind())
                })
                .map(|(key, tx)| (*key, tx.clone()))
                .collect();
            if records.is_empty() || !self.transmit(q, None) {
                continue;
            }
            let at = self.now + self.latency();
            self.schedule(at, Event::SyncBatch { to: p, from: q, records });
        }
        let next = self.now + self.config.sync_interval;
        self.schedule(next, Event::SyncRound);
    }

    fn sync_batch(&mut self, to: PeerId, from: PeerId, records: Vec<(RecordKey, Transaction)>) {
        if self.partitioned(from, to, self.now) {
            self.record(to, TraceKind::Partitioned, None);
            return;
        }
        let now = self.now;
        for (key, tx) in records {
            let p = &mut self.peers[to];
            if p.ledger.contains(&key) || p.rejected.contains(&key.hash) || p.censors(key.kind) {
                continue;
            }
            p.seen.insert(key.hash);
            let outcome = p.apply(&tx, key.hash, key.tick, now);
            self.record_outcome(to, &outcome, key.hash, true);
        }
    }

    fn step(&mut self) -> bool {
        let Some(((tick, _), event)) = self.queue.pop_first() else {
            return false;
        };
        if event.is_message() {
            self.in_flight -= 1;
        }
        self.now = self.now.max(tick);
        match event {
            Event::Deliver {
                to,
                from,
                tx,
                hash,
                origin,
            } => self.deliver(to, from, tx, hash, origin),
            Event::SyncBatch { to, from, records } => self.sync_batch(to, from, records),
            Event::SyncRound => self.sync_round(),
            Event::PartitionMark { window, start } => {
                let kind = if start {
                    TraceKind::PartitionStart
                } else {
                    TraceKind::PartitionEnd
                };
                let w = &self.config.partitions[window];
                // A healed window's original end mark is stale.
                if start || w.end == self.now {
                    let first = w.side.first().copied().unwrap_or(0);
                    self.record(first, kind, None);
                }
            }
        }
        true
    }

    fn next_tick(&self) -> Option<u64> {
        self.queue.first_key_value().map(|((t, _), _)| *t)
    }

    /// Process every event scheduled before `tick`, then move the clock to
    /// `tick` and advance every replica's phase.
    pub fn advance_to(&mut self, tick: u64) {
        while self.next_tick().is_some_and(|t| t < tick) {
            self.step();
        }
        self.now = self.now.max(tick);
        let now = self.now;
        for p in &mut self.peers {
            p.ledger.advance_phase(now);
        }
    }

    fn honest_agree(&self) -> bool {
        let mut hashes = self
            .peers
            .iter()
            .filter(|p| p.behavior.is_none())
            .map(|p| p.ledger.state_hash());
        match hashes.next() {
            Some(first) => hashes.all(|h| h == first),
            None => true,
        }
    }

    fn partition_open(&self) -> bool {
        self.config
            .partitions
            .iter()
            .any(|w| w.start <= self.now && self.now < w.end)
    }

    /// Step events until the honest replicas agree with nothing left in
    /// flight, or `max_ticks` elapse.
    pub fn run_until_quiescent(&mut self, max_ticks: u64) -> ConvergenceReport {
        let deadline = self.now.saturating_add(max_ticks);
        loop {
            if self.in_flight == 0 && !self.partition_open() {
                if self.honest_agree() {
                    break;
                }
                if self.config.sync_interval == 0 {
                    break;
                }
            }
            match self.next_tick() {
                Some(t) if t <= deadline => {
                    self.step();
                }
                _ => {
                    self.now = self.now.max(deadline);
                    break;
                }
            }
        }
        let now = self.now;
        for p in &mut self.peers {
            p.ledger.advance_phase(now);
        }
        self.report()
    }

    pub fn report(&self) -> ConvergenceReport {
        let peers: Vec<PeerSummary> = self
            .peers
            .iter()
            .enumerate()
            .map(|(id, p)| PeerSummary {
                peer: id,
                honest: p.behavior.is_none(),
                state_hash: p.ledger.state_hash(),
                records: p.ledger.record_count(),
            })
            .collect();
        let converged = self.honest_agree();
        ConvergenceReport {
            tick: self.now,
            converged,
            peers,
            messages_sent: self.sent,
            messages_dropped: self.dropped,
        }
    }

    /// Peers whose ledger is not the serial replay of a subset of submitted
    /// transactions.
    pub fn safety_violations(&self) -> Vec<PeerId> {
        self.peers
            .iter()
            .enumerate()
            .filter(|(_, p)| {
                let records: Vec<(u64, &Transaction)> =
                    p.ledger.records().map(|(k, tx)| (k.tick, tx)).collect();
                if records
                    .iter()
                    .any(|(_, tx)| !self.submitted.contains(&tx.hash()))
                {
                    return true;
                }
                let (replayed, outcomes) = replay(records.iter().copied());
                outcomes.iter().any(|o| *o != ApplyOutcome::Applied)
                    || !replayed.records().map(|(k, _)| k).eq(p.ledger.records().map(|(k, _)| k))
            })
            .map(|(id, _)| id)
            .collect()
    }
}
