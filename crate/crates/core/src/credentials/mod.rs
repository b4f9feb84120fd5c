//! Eligibility credentials, the registrar, and selective-disclosure voting
//! credentials built from signed salted attribute commitments.

mod registrar;

use std::collections::BTreeMap;

use ed25519_dalek::{Signature, Signer, SigningKey, VerifyingKey};
use rand::{CryptoRng, RngCore};
use thiserror::Error;

use crate::codec::{CodecError, Reader, Writer};
use crate::hash::{self, tag, Hash32};

pub use registrar::{registrar_nullifier, IssuanceRecord, RegistrarState, RegistrationTicket};

const VC_DOMAIN: &[u8] = b"sdvote/eligibility-vc/v1";
const CREDENTIAL_DOMAIN: &[u8] = b"sdvote/credential/v1";

pub const SALT_LEN: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CredentialError {
    #[error("issuer is not trusted")]
    UntrustedIssuer,
    #[error("signature does not verify")]
    BadSignature,
    #[error("person already registered for this election")]
    DuplicateRegistration,
    #[error("presentation is not for this election")]
    ElectionMismatch,
    #[error("malformed presentation: {0}")]
    MalformedPresentation(String),
    #[error("empty person identifier")]
    EmptyPid,
    #[error("registration ticket was already used or belongs to another election")]
    InvalidTicket,
    #[error("registrar log: {0}")]
    Log(String),
}

/// A simulated identity provider.
#[derive(Clone, Debug)]
pub struct IssuerKey {
    pub issuer_id: Vec<u8>,
    signing: SigningKey,
}

impl IssuerKey {
    pub fn generate<R: RngCore + CryptoRng>(issuer_id: &[u8], rng: &mut R) -> Self {
        Self {
            issuer_id: issuer_id.to_vec(),
            signing: SigningKey::generate(rng),
        }
    }

    pub fn verifying_key(&self) -> VerifyingKey {
        self.signing.verifying_key()
    }
}

/// Identity-provider credential attesting a person's eligibility.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EligibilityVC {
    pub pid: Vec<u8>,
    pub attributes: BTreeMap<String, String>,
    pub issuer_id: Vec<u8>,
    pub issuer_signature: [u8; 64],
}

impl EligibilityVC {
    fn signed_message(issuer_id: &[u8], pid: &[u8], attributes: &BTreeMap<String, String>) -> Vec<u8> {
        let mut w = Writer::new();
        w.fixed(VC_DOMAIN).var(issuer_id).var(pid).u32(attributes.len() as u32);
        for (k, v) in attributes {
            w.var(k.as_bytes()).var(v.as_bytes());
        }
        w.finish()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.var(&self.pid).u32(self.attributes.len() as u32);
        for (k, v) in &self.attributes {
            w.var(k.as_bytes()).var(v.as_bytes());
        }
        w.var(&self.issuer_id).fixed(&self.issuer_signature);
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CodecError> {
        let mut r = Reader::new(bytes);
        let pid = r.var()?.to_vec();
        let count = r.u32()?;
        let mut attributes = BTreeMap::new();
        for _ in 0..count {
            let k = String::from_utf8(r.var()?.to_vec()).map_err(|_| CodecError::Invalid("utf-8"))?;
            let v = String::from_utf8(r.var()?.to_vec()).map_err(|_| CodecError::Invalid("utf-8"))?;
            attributes.insert(k, v);
        }
        let issuer_id = r.var()?.to_vec();
        let issuer_signature = r.array::<64>()?;
        r.finish()?;
        Ok(Self {
            pid,
            attributes,
            issuer_id,
            issuer_signature,
        })
    }
}

pub fn issuer_issue_vc(
    issuer: &IssuerKey,
    pid: &[u8],
    attributes: BTreeMap<String, String>,
) -> Result<EligibilityVC, CredentialError> {
    if pid.is_empty() {
        return Err(CredentialError::EmptyPid);
    }
    let msg = EligibilityVC::signed_message(&issuer.issuer_id, pid, &attributes);
    Ok(EligibilityVC {
        pid: pid.to_vec(),
        attributes,
        issuer_id: issuer.issuer_id.clone(),
        issuer_signature: issuer.signing.sign(&msg).to_bytes(),
    })
}

/// `C_2`: commitment to the election id attribute.
pub fn election_attribute(election_id: &Hash32, salt: &[u8; SALT_LEN]) -> Hash32 {
    hash::tagged(tag::ATTRIBUTE, &[b"election_id", election_id, salt])
}

/// `C_3`: commitment to the issuance timestamp attribute.
pub fn timestamp_attribute(timestamp: u64, salt: &[u8; SALT_LEN]) -> Hash32 {
    hash::tagged(tag::ATTRIBUTE, &[b"ts", &timestamp.to_be_bytes(), salt])
}

fn credential_message(commitments: &[Hash32; 3]) -> Vec<u8> {
    let mut m = CREDENTIAL_DOMAIN.to_vec();
    for c in commitments {
        m.extend_from_slice(c);
    }
    m
}

/// Registrar-signed voting credential held by the voter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Credential {
    pub secret_id: [u8; 32],
    pub election_id: Hash32,
    pub issuance_timestamp: u64,
    /// `C_1` (the ledger commitment), `C_2`, `C_3`.
    pub commitments: [Hash32; 3],
    pub salt_election: [u8; SALT_LEN],
    pub salt_timestamp: [u8; SALT_LEN],
    pub registrar_signature: [u8; 64],
}

impl Credential {
    pub fn commitment(&self) -> Hash32 {
        self.commitments[0]
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.var(&self.secret_id)
            .var(&self.election_id)
            .u64(self.issuance_timestamp);
        for c in &self.commitments {
            w.var(c);
        }
        w.var(&self.salt_election)
            .var(&self.salt_timestamp)
            .var(&self.registrar_signature);
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CodecError> {
        let mut r = Reader::new(bytes);
        let secret_id = var_array(&mut r)?;
        let election_id = var_array(&mut r)?;
        let issuance_timestamp = r.u64()?;
        let commitments = [var_array(&mut r)?, var_array(&mut r)?, var_array(&mut r)?];
        let salt_election = var_array(&mut r)?;
        let salt_timestamp = var_array(&mut r)?;
        let registrar_signature = var_array(&mut r)?;
        r.finish()?;
        Ok(Self {
            secret_id,
            election_id,
            issuance_timestamp,
            commitments,
            salt_election,
            salt_timestamp,
            registrar_signature,
        })
    }
}

fn var_array<const N: usize>(r: &mut Reader<'_>) -> Result<[u8; N], CodecError> {
    r.var()?
        .try_into()
        .map_err(|_| CodecError::Invalid("field length"))
}

/// Shown credential: all three commitments, the election id, and its salt.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presentation {
    pub commitments: [Hash32; 3],
    pub registrar_signature: [u8; 64],
    pub election_id: Hash32,
    pub salt_election: [u8; SALT_LEN],
}

impl Presentation {
    pub fn write(&self, w: &mut Writer) {
        for c in &self.commitments {
            w.var(c);
        }
        w.var(&self.registrar_signature)
            .var(&self.election_id)
            .var(&self.salt_election);
    }

    pub fn read(r: &mut Reader<'_>) -> Result<Self, CodecError> {
        Ok(Self {
            commitments: [var_array(r)?, var_array(r)?, var_array(r)?],
            registrar_signature: var_array(r)?,
            election_id: var_array(r)?,
            salt_election: var_array(r)?,
        })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        self.write(&mut w);
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CredentialError> {
        let mut r = Reader::new(bytes);
        let p = Self::read(&mut r).map_err(|e| CredentialError::MalformedPresentation(e.to_string()))?;
        r.finish()
            .map_err(|e| CredentialError::MalformedPresentation(e.to_string()))?;
        Ok(p)
    }
}

pub fn present(credential: &Credential) -> Presentation {
    Presentation {
        commitments: credential.commitments,
        registrar_signature: credential.registrar_signature,
        election_id: credential.election_id,
        salt_election: credential.salt_election,
    }
}

/// Check a presentation and return the ledger commitment it vouches for.
pub fn verify_presentation(
    p: &Presentation,
    registrar_pk: &VerifyingKey,
    election_id: &Hash32,
) -> Result<Hash32, CredentialError> {
    let sig = Signature::from_bytes(&p.registrar_signature);
    registrar_pk
        .verify_strict(&credential_message(&p.commitments), &sig)
        .map_err(|_| CredentialError::BadSignature)?;
    if p.election_id != *election_id
        || election_attribute(&p.election_id, &p.salt_election) != p.commitments[1]
    {
        return Err(CredentialError::ElectionMismatch);
    }
    Ok(p.commitments[0])
}

fn verify_vc(trusted: &BTreeMap<Vec<u8>, VerifyingKey>, vc: &EligibilityVC) -> Result<(), CredentialError> {
    let key = trusted
        .get(&vc.issuer_id)
        .ok_or(CredentialError::UntrustedIssuer)?;
    let msg = EligibilityVC::signed_message(&vc.issuer_id, &vc.pid, &vc.attributes);
    key.verify_strict(&msg, &Signature::from_bytes(&vc.issuer_signature))
        .map_err(|_| CredentialError::BadSignature)
}

fn sign_commitments(key: &SigningKey, commitments: &[Hash32; 3]) -> [u8; 64] {
    key.sign(&credential_message(commitments)).to_bytes()
}
