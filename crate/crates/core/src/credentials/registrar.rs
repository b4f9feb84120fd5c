use std::collections::{BTreeMap, HashSet};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use ed25519_dalek::{SigningKey, VerifyingKey};
use rand::{CryptoRng, RngCore};

use super::{
    election_attribute, sign_commitments, timestamp_attribute, verify_vc, Credential,
    CredentialError, EligibilityVC, SALT_LEN,
};
use crate::hash::{self, tag, Hash32};

/// One line of the registrar's append-only audit log.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IssuanceRecord {
    pub registrar_nullifier: Hash32,
    pub election_id: Hash32,
    pub timestamp: u64,
}

impl IssuanceRecord {
    fn to_line(&self) -> String {
        format!(
            "{} {} {}\n",
            hex::encode(self.registrar_nullifier),
            hex::encode(self.election_id),
            self.timestamp
        )
    }

    fn parse(line: &str) -> Option<Self> {
        let mut parts = line.split_whitespace();
        let nf = hex::decode(parts.next()?).ok()?.try_into().ok()?;
        let eid = hex::decode(parts.next()?).ok()?.try_into().ok()?;
        let timestamp = parts.next()?.parse().ok()?;
        if parts.next().is_some() {
            return None;
        }
        Some(Self {
            registrar_nullifier: nf,
            election_id: eid,
            timestamp,
        })
    }
}

/// Proof that the eligibility check passed; consumed by
/// [`RegistrarState::issue`].
#[derive(Debug, PartialEq, Eq)]
pub struct RegistrationTicket {
    pub registrar_nullifier: Hash32,
    election_id: Hash32,
}

/// The trusted registrar with its private nullifier registry.
pub struct RegistrarState {
    signing: SigningKey,
    trusted_issuers: BTreeMap<Vec<u8>, VerifyingKey>,
    used_nullifiers: HashSet<Hash32>,
    issued: HashSet<Hash32>,
    issuance_log: Vec<IssuanceRecord>,
    log_file: Option<File>,
}

impl RegistrarState {
    pub fn new(signing: SigningKey) -> Self {
        Self {
            signing,
            trusted_issuers: BTreeMap::new(),
            used_nullifiers: HashSet::new(),
            issued: HashSet::new(),
            issuance_log: Vec::new(),
            log_file: None,
        }
    }

    pub fn generate<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        Self::new(SigningKey::generate(rng))
    }

    /// Open with a persistent audit log, replaying any existing records.
    pub fn open(signing: SigningKey, log_path: &Path) -> Result<Self, CredentialError> {
        let mut state = Self::new(signing);
        let io = |e: std::io::Error| CredentialError::Log(e.to_string());
        if log_path.exists() {
            let reader = BufReader::new(File::open(log_path).map_err(io)?);
            for (lineno, line) in reader.lines().enumerate() {
                let line = line.map_err(io)?;
                if line.trim().is_empty() {
                    continue;
                }
                let rec = IssuanceRecord::parse(&line)
                    .ok_or_else(|| CredentialError::Log(format!("bad record on line {}", lineno + 1)))?;
                state.used_nullifiers.insert(rec.registrar_nullifier);
                state.issued.insert(rec.registrar_nullifier);
                state.issuance_log.push(rec);
            }
        }
        state.log_file = Some(
            OpenOptions::new()
                .create(true)
                .append(true)
                .open(log_path)
                .map_err(io)?,
        );
        Ok(state)
    }

    pub fn verifying_key(&self) -> VerifyingKey {
        self.signing.verifying_key()
    }

    pub fn trust_issuer(&mut self, issuer_id: &[u8], key: VerifyingKey) {
        self.trusted_issuers.insert(issuer_id.to_vec(), key);
    }

    pub fn used_nullifier_count(&self) -> usize {
        self.used_nullifiers.len()
    }

    pub fn issuance_log(&self) -> &[IssuanceRecord] {
        &self.issuance_log
    }

    /// Validate the VC against the trusted issuer set and return its PID.
    pub fn verify_vc<'a>(&self, vc: &'a EligibilityVC) -> Result<&'a [u8], CredentialError> {
        verify_vc(&self.trusted_issuers, vc)?;
        Ok(&vc.pid)
    }

    /// Check-and-insert of `v_nf = H(pid ‖ election_id)`.
    pub fn check_and_record(
        &mut self,
        pid: &[u8],
        election_id: &Hash32,
    ) -> Result<RegistrationTicket, CredentialError> {
        let v_nf = registrar_nullifier(pid, election_id);
        if !self.used_nullifiers.insert(v_nf) {
            return Err(CredentialError::DuplicateRegistration);
        }
        Ok(RegistrationTicket {
            registrar_nullifier: v_nf,
            election_id: *election_id,
        })
    }

    /// Issue a fresh voting credential for a checked registration.
    pub fn issue<R: RngCore + CryptoRng>(
        &mut self,
        ticket: RegistrationTicket,
        now: u64,
        rng: &mut R,
    ) -> Result<Credential, CredentialError> {
        if !self.used_nullifiers.contains(&ticket.registrar_nullifier)
            || self.issued.contains(&ticket.registrar_nullifier)
        {
            return Err(CredentialError::InvalidTicket);
        }
        let record = IssuanceRecord {
            registrar_nullifier: ticket.registrar_nullifier,
            election_id: ticket.election_id,
            timestamp: now,
        };
        if let Some(f) = self.log_file.as_mut() {
            f.write_all(record.to_line().as_bytes())
                .and_then(|_| f.sync_data())
                .map_err(|e| CredentialError::Log(e.to_string()))?;
        }
        self.issued.insert(ticket.registrar_nullifier);
        self.issuance_log.push(record);

        let mut secret_id = [0u8; 32];
        rng.fill_bytes(&mut secret_id);
        let mut salt_election = [0u8; SALT_LEN];
        rng.fill_bytes(&mut salt_election);
        let mut salt_timestamp = [0u8; SALT_LEN];
        rng.fill_bytes(&mut salt_timestamp);
        let commitments = [
            hash::commitment(&secret_id),
            election_attribute(&ticket.election_id, &salt_election),
            timestamp_attribute(now, &salt_timestamp),
        ];
        Ok(Credential {
            secret_id,
            election_id: ticket.election_id,
            issuance_timestamp: now,
            commitments,
            salt_election,
            salt_timestamp,
            registrar_signature: sign_commitments(&self.signing, &commitments),
        })
    }

    /// The full registration session: VC check, nullifier check, issuance.
    pub fn register<R: RngCore + CryptoRng>(
        &mut self,
        vc: &EligibilityVC,
        election_id: &Hash32,
        now: u64,
        rng: &mut R,
    ) -> Result<Credential, CredentialError> {
        let pid = self.verify_vc(vc)?.to_vec();
        let ticket = self.check_and_record(&pid, election_id)?;
        self.issue(ticket, now, rng)
    }
}

pub fn registrar_nullifier(pid: &[u8], election_id: &Hash32) -> Hash32 {
    hash::tagged(tag::REGISTRAR_NULLIFIER, &[pid, election_id])
}
