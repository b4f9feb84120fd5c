//! Scenario files: TOML documents describing one simulated election.
//!
//! ```toml
//! seed = "smoke-1"                 # required, non-empty
//! proposal = "Adopt the proposal?" # optional
//!
//! [election]
//! bits = 256                       # even, >= 256
//! threshold = 2
//! shares = 3
//! share_holders = "committee"      # or "voters"
//! publishing = [0, 1, 2]           # optional, participant positions
//! tampering = []                   # optional, positions publishing a bad share first
//!
//! [schedule]                       # optional, derived from the voter count
//! registration_close = 1000
//! voting_close = 2000
//! tally_close = 3000               # optional
//!
//! [voters]
//! count = 20
//! yes_probability = 0.5            # used when `choices` is absent
//! choices = [1, 0, 1]              # optional, length must equal `count`
//!
//! [[adversary]]
//! script = "double_vote"           # see AdversaryScript names
//! choice = 1
//!
//! [network]
//! peers = 4
//! latency = [1, 3]
//! drop_rate = 0.0
//! fanout = 3
//! sync_interval = 5
//! trace = true
//! byzantine = [{ peer = 3, behavior = "censor_votes" }]
//! partitions = [{ start = 1005, end = 1040, side = [0, 1] }]
//!
//! [run]
//! batch = 25
//! settle_ticks = 500
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::Rng;
use serde::Deserialize;
use thiserror::Error;

use sdvote::actors::{AdversaryScript, AdversarySpec, ElectionSpec, ShareHolders};
use sdvote::hebackend::{MAX_SHARES, MIN_TOY_BITS};
use sdvote::ledger::PhaseSchedule;
use sdvote::netsim::{Byzantine, NetworkConfig, PartitionWindow};
use sdvote::rng;

/// Largest voter population a scenario may request.
pub const MAX_VOTERS: usize = 100_000;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario: {0}")]
    Io(#[from] std::io::Error),
    #[error("scenario does not parse: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid(msg.into())
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub seed: String,
    #[serde(default = "default_proposal")]
    pub proposal: String,
    pub election: ElectionSection,
    #[serde(default)]
    pub schedule: Option<ScheduleSection>,
    pub voters: VotersSection,
    #[serde(default, rename = "adversary")]
    pub adversaries: Vec<AdversaryEntry>,
    #[serde(default)]
    pub network: NetworkSection,
    #[serde(default)]
    pub run: RunSection,
}

fn default_proposal() -> String {
    "Adopt the proposal?".into()
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum HolderKind {
    Committee,
    Voters,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElectionSection {
    pub bits: u32,
    pub threshold: u16,
    pub shares: u16,
    #[serde(default = "default_holders")]
    pub share_holders: HolderKind,
    #[serde(default)]
    pub publishing: Option<Vec<usize>>,
    #[serde(default)]
    pub tampering: Vec<usize>,
}

fn default_holders() -> HolderKind {
    HolderKind::Committee
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    pub registration_close: u64,
    pub voting_close: u64,
    #[serde(default)]
    pub tally_close: Option<u64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VotersSection {
    pub count: usize,
    #[serde(default = "default_yes")]
    pub yes_probability: f64,
    #[serde(default)]
    pub choices: Option<Vec<u64>>,
}

fn default_yes() -> f64 {
    0.5
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdversaryEntry {
    pub script: String,
    #[serde(default = "default_choice")]
    pub choice: u64,
}

fn default_choice() -> u64 {
    1
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ByzantineEntry {
    pub peer: usize,
    pub behavior: Byzantine,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionEntry {
    pub start: u64,
    pub end: u64,
    pub side: BTreeSet<usize>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkSection {
    pub peers: usize,
    pub latency: (u64, u64),
    pub drop_rate: f64,
    pub fanout: usize,
    pub sync_interval: u64,
    pub trace: bool,
    pub byzantine: Vec<ByzantineEntry>,
    pub partitions: Vec<PartitionEntry>,
}

impl Default for NetworkSection {
    fn default() -> Self {
        let d = NetworkConfig::default();
        Self {
            peers: d.peer_count,
            latency: d.latency,
            drop_rate: d.drop_rate,
            fanout: d.fanout,
            sync_interval: d.sync_interval,
            trace: true,
            byzantine: Vec::new(),
            partitions: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub batch: usize,
    pub settle_ticks: u64,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            batch: 25,
            settle_ticks: 500,
        }
    }
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        let scenario: Scenario = toml::from_str(text)?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.seed.is_empty() {
            return Err(invalid("seed must be non-empty"));
        }
        let e = &self.election;
        if e.bits < MIN_TOY_BITS || !e.bits.is_multiple_of(2) {
            return Err(invalid(format!("bits must be even and at least {MIN_TOY_BITS}")));
        }
        if e.threshold == 0 || e.threshold > e.shares || e.shares > MAX_SHARES {
            return Err(invalid(format!(
                "need 1 <= threshold <= shares <= {MAX_SHARES}, got {} of {}",
                e.threshold, e.shares
            )));
        }
        let positions = e.publishing.iter().flatten().chain(&e.tampering);
        if positions.clone().any(|&p| p >= usize::from(e.shares)) {
            return Err(invalid("participant position out of range"));
        }
        let v = &self.voters;
        if v.count == 0 || v.count > MAX_VOTERS {
            return Err(invalid(format!("voter count must lie in 1..={MAX_VOTERS}")));
        }
        if !(0.0..=1.0).contains(&v.yes_probability) {
            return Err(invalid("yes_probability must lie in [0, 1]"));
        }
        if let Some(c) = &v.choices {
            if c.len() != v.count || c.iter().any(|&x| x > 1) {
                return Err(invalid("choices must list `count` values, each 0 or 1"));
            }
        }
        if e.share_holders == HolderKind::Voters && v.count < usize::from(e.shares) {
            return Err(invalid("voter-held shares need at least `shares` voters"));
        }
        for a in &self.adversaries {
            if AdversaryScript::parse(&a.script).is_none() {
                return Err(invalid(format!("unknown adversary script {:?}", a.script)));
            }
            if a.choice > 1 {
                return Err(invalid("adversary choice must be 0 or 1"));
            }
        }
        if let Some(s) = self.schedule {
            if !self.phase_schedule_from(s).is_valid() {
                return Err(invalid("schedule must satisfy 0 < registration_close < voting_close < tally_close"));
            }
        }
        if self.run.batch == 0 {
            return Err(invalid("batch must be positive"));
        }
        self.network_config()
            .validate()
            .map_err(|e| invalid(e.to_string()))?;
        Ok(())
    }

    fn phase_schedule_from(&self, s: ScheduleSection) -> PhaseSchedule {
        PhaseSchedule {
            registration_close: s.registration_close,
            voting_close: s.voting_close,
            tally_close: s.tally_close,
        }
    }

    pub fn network_config(&self) -> NetworkConfig {
        let n = &self.network;
        NetworkConfig {
            peer_count: n.peers,
            latency: n.latency,
            drop_rate: n.drop_rate,
            fanout: n.fanout,
            sync_interval: n.sync_interval,
            partitions: n
                .partitions
                .iter()
                .map(|p| PartitionWindow {
                    start: p.start,
                    end: p.end,
                    side: p.side.clone(),
                })
                .collect(),
            byzantine: n
                .byzantine
                .iter()
                .map(|b| (b.peer, b.behavior))
                .collect::<BTreeMap<_, _>>(),
            trace: n.trace,
        }
    }

    /// Honest voters' choices, drawn from the seed when not listed.
    pub fn choices(&self) -> Vec<u64> {
        if let Some(c) = &self.voters.choices {
            return c.clone();
        }
        let mut rng = rng::derive(self.seed.as_bytes(), "choices");
        (0..self.voters.count)
            .map(|_| u64::from(rng.gen_bool(self.voters.yes_probability)))
            .collect()
    }

    pub fn election_spec(&self) -> ElectionSpec {
        let e = &self.election;
        let mut spec = ElectionSpec::new(self.seed.as_bytes(), e.bits, e.threshold, e.shares, self.choices());
        spec.proposal = self.proposal.clone();
        spec.network = self.network_config();
        if let Some(s) = self.schedule {
            spec.schedule = self.phase_schedule_from(s);
        }
        spec.share_holders = match e.share_holders {
            HolderKind::Committee => ShareHolders::Committee,
            HolderKind::Voters => ShareHolders::Voters,
        };
        spec.publishing = e.publishing.clone();
        spec.tampering = e.tampering.clone();
        spec.adversaries = self
            .adversaries
            .iter()
            .map(|a| AdversarySpec {
                script: AdversaryScript::parse(&a.script).expect("validated"),
                choice: a.choice,
            })
            .collect();
        spec.batch = self.run.batch;
        spec.settle_ticks = self.run.settle_ticks;
        spec
    }
}
