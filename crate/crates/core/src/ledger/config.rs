use ed25519_dalek::VerifyingKey;

use super::Phase;
use crate::codec::{CodecError, Reader, Writer};
use crate::hash::{self, tag, Hash32};
use crate::hebackend::{PaillierPublicKey, ThresholdParams};
use crate::zkproofs::BackendId;

/// Number of ballot options; ballots encrypt 0 or 1.
pub const CHOICE_COUNT: u8 = 2;

/// Phase boundaries in simulation ticks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PhaseSchedule {
    pub registration_close: u64,
    pub voting_close: u64,
    /// Shares are accepted until this tick; `None` keeps tallying open.
    pub tally_close: Option<u64>,
}

impl PhaseSchedule {
    pub fn is_valid(&self) -> bool {
        self.registration_close < self.voting_close
            && self.tally_close.is_none_or(|c| self.voting_close < c)
    }

    /// Phase in force at `tick` once a configuration exists.
    pub fn phase_at(&self, tick: u64) -> Phase {
        if tick < self.registration_close {
            Phase::Registration
        } else if tick < self.voting_close {
            Phase::Voting
        } else if self.tally_close.is_none_or(|c| tick < c) {
            Phase::Tally
        } else {
            Phase::Closed
        }
    }
}

/// Public election parameters. The election id is the digest of everything
/// else, so any change to the parameters yields a different election.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElectionConfig {
    election_id: Hash32,
    pub proposal: String,
    pub nonce: [u8; 16],
    pub pk: PaillierPublicKey,
    pub params: ThresholdParams,
    pub registrar_pk: VerifyingKey,
    pub vote_backend: BackendId,
    pub schedule: PhaseSchedule,
    /// Opaque verification keys for succinct backends; empty otherwise.
    pub vote_vk: Vec<u8>,
    pub share_vk: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("threshold must satisfy 1 <= t <= N")]
    Threshold,
    #[error("phase schedule is not strictly increasing")]
    Schedule,
    #[error("verification values do not match the share count")]
    VerificationValues,
}

impl ElectionConfig {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        proposal: impl Into<String>,
        nonce: [u8; 16],
        pk: PaillierPublicKey,
        params: ThresholdParams,
        registrar_pk: VerifyingKey,
        vote_backend: BackendId,
        schedule: PhaseSchedule,
    ) -> Result<Self, ConfigError> {
        let mut cfg = Self {
            election_id: [0; 32],
            proposal: proposal.into(),
            nonce,
            pk,
            params,
            registrar_pk,
            vote_backend,
            schedule,
            vote_vk: Vec::new(),
            share_vk: Vec::new(),
        };
        cfg.validate()?;
        cfg.election_id = cfg.derive_id();
        Ok(cfg)
    }

    pub fn election_id(&self) -> &Hash32 {
        &self.election_id
    }

    pub fn threshold(&self) -> u16 {
        self.params.t
    }

    pub fn share_count(&self) -> u16 {
        self.params.big_n
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let p = &self.params;
        if p.t == 0 || p.t > p.big_n {
            return Err(ConfigError::Threshold);
        }
        if p.share_verification.len() != usize::from(p.big_n) {
            return Err(ConfigError::VerificationValues);
        }
        if !self.schedule.is_valid() {
            return Err(ConfigError::Schedule);
        }
        Ok(())
    }

    fn body(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.var(self.proposal.as_bytes()).fixed(&self.nonce).u8(CHOICE_COUNT);
        self.pk.write(&mut w);
        self.params.write(&self.pk, &mut w);
        w.fixed(self.registrar_pk.as_bytes())
            .u8(self.vote_backend.to_byte())
            .u64(self.schedule.registration_close)
            .u64(self.schedule.voting_close);
        match self.schedule.tally_close {
            Some(c) => w.u8(1).u64(c),
            None => w.u8(0),
        };
        w.var(&self.vote_vk).var(&self.share_vk);
        w.finish()
    }

    fn derive_id(&self) -> Hash32 {
        hash::tagged(tag::ELECTION_ID, &[&self.body()])
    }

    pub fn write(&self, w: &mut Writer) {
        w.fixed(&self.body());
    }

    pub fn read(r: &mut Reader<'_>) -> Result<Self, CodecError> {
        let proposal =
            String::from_utf8(r.var()?.to_vec()).map_err(|_| CodecError::Invalid("proposal utf-8"))?;
        let nonce = r.array::<16>()?;
        if r.u8()? != CHOICE_COUNT {
            return Err(CodecError::Invalid("choice count"));
        }
        let pk = PaillierPublicKey::read(r)?;
        let params = ThresholdParams::read(&pk, r)?;
        let registrar_pk = VerifyingKey::from_bytes(&r.array::<32>()?)
            .map_err(|_| CodecError::Invalid("registrar key"))?;
        let vote_backend =
            BackendId::from_byte(r.u8()?).ok_or(CodecError::Invalid("vote backend"))?;
        let registration_close = r.u64()?;
        let voting_close = r.u64()?;
        let tally_close = match r.u8()? {
            0 => None,
            1 => Some(r.u64()?),
            _ => return Err(CodecError::Invalid("tally close flag")),
        };
        let vote_vk = r.var()?.to_vec();
        let share_vk = r.var()?.to_vec();
        let mut cfg = Self {
            election_id: [0; 32],
            proposal,
            nonce,
            pk,
            params,
            registrar_pk,
            vote_backend,
            schedule: PhaseSchedule {
                registration_close,
                voting_close,
                tally_close,
            },
            vote_vk,
            share_vk,
        };
        cfg.validate().map_err(|_| CodecError::Invalid("election parameters"))?;
        cfg.election_id = cfg.derive_id();
        Ok(cfg)
    }
}
