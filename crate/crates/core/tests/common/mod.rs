//! Deterministic protocol artifacts shared by the golden and soundness tests.
#![allow(dead_code)]

use rug::Integer;

use sdvote::credentials::{
    issuer_issue_vc, present, Credential, EligibilityVC, IssuerKey, Presentation, RegistrarState,
};
use sdvote::hash::{self, Hash32};
use sdvote::hebackend::{encrypt_with, keygen, partial_decrypt, Ciphertext, PartialDecryption, ThresholdKeys};
use sdvote::ledger::{merkle::MerkleTree, ElectionConfig, PhaseSchedule, Transaction};
use sdvote::rng;
use sdvote::zkproofs::{
    prove_enc_validity, prove_share, prove_vote, BackendId, EncValidityProof, ShareCorrectnessProof,
    VoteProof, VoteStatement, VoteWitness,
};

pub struct Artifacts {
    pub keys: ThresholdKeys,
    pub registrar: RegistrarState,
    pub vc: EligibilityVC,
    pub credential: Credential,
    pub presentation: Presentation,
    pub config: ElectionConfig,
    pub tree: MerkleTree,
    pub enc_context: Vec<u8>,
    pub enc_ciphertext: Ciphertext,
    pub enc_proof: EncValidityProof,
    pub c_sum: Ciphertext,
    pub partial: PartialDecryption,
    pub share_proof: ShareCorrectnessProof,
    pub vote_ciphertext: Ciphertext,
    pub nullifier: Hash32,
    pub vote_proof: VoteProof,
}

impl Artifacts {
    pub fn build() -> Self {
        let mut rng = rng::from_seed(b"golden");
        let keys = keygen(256, 2, 3, &mut rng).unwrap();
        let issuer = IssuerKey::generate(b"idp", &mut rng);
        let mut registrar = RegistrarState::generate(&mut rng);
        registrar.trust_issuer(&issuer.issuer_id, issuer.verifying_key());
        let config = ElectionConfig::new(
            "Adopt the proposal?",
            [1; 16],
            keys.pk.clone(),
            keys.params.clone(),
            registrar.verifying_key(),
            BackendId::Transparent,
            PhaseSchedule {
                registration_close: 10,
                voting_close: 20,
                tally_close: None,
            },
        )
        .unwrap();
        let eid = *config.election_id();
        let attrs = [("citizen".to_string(), "yes".to_string())].into_iter().collect();
        let vc = issuer_issue_vc(&issuer, b"person-0001", attrs).unwrap();
        let credential = registrar.register(&vc, &eid, 1_700_000_000, &mut rng).unwrap();
        let presentation = present(&credential);

        let pk = &keys.pk;
        let enc_context = b"context".to_vec();
        let r = Integer::from(0x1234_5678u32);
        let enc_ciphertext = encrypt_with(pk, &Integer::from(1), &r).unwrap();
        let enc_proof = prove_enc_validity(pk, &enc_ciphertext, 1, &r, &enc_context, &mut rng).unwrap();

        let c_sum = encrypt_with(pk, &Integer::from(5), &Integer::from(77u32)).unwrap();
        let share = &keys.shares[1];
        let partial = partial_decrypt(pk, share, &keys.params, &c_sum);
        let share_proof = prove_share(pk, share, &keys.params, &c_sum, &partial, &mut rng).unwrap();

        let cm = credential.commitment();
        let tree = MerkleTree::new(vec![[0x11; 32], cm, [0xee; 32]]);
        let vote_r = Integer::from(0xdead_beefu32);
        let vote_ciphertext = encrypt_with(pk, &Integer::from(0), &vote_r).unwrap();
        let nullifier = hash::vote_nullifier(&credential.secret_id, &eid);
        let witness = VoteWitness {
            secret_id: credential.secret_id,
            choice: 0,
            randomizer: vote_r,
            merkle_path: tree.path_for(&cm).unwrap(),
        };
        let stmt = VoteStatement {
            election_id: eid,
            merkle_root: tree.root(),
            nullifier,
            ciphertext: &vote_ciphertext,
            pk,
        };
        let vote_proof = prove_vote(BackendId::Transparent, &stmt, &witness, &mut rng).unwrap();

        Self {
            keys,
            registrar,
            vc,
            credential,
            presentation,
            config,
            tree,
            enc_context,
            enc_ciphertext,
            enc_proof,
            c_sum,
            partial,
            share_proof,
            vote_ciphertext,
            nullifier,
            vote_proof,
        }
    }

    pub fn vote_statement(&self) -> VoteStatement<'_> {
        VoteStatement {
            election_id: *self.config.election_id(),
            merkle_root: self.tree.root(),
            nullifier: self.nullifier,
            ciphertext: &self.vote_ciphertext,
            pk: &self.keys.pk,
        }
    }

    pub fn vote_tx(&self) -> Transaction {
        Transaction::Vote {
            election_id: *self.config.election_id(),
            ciphertext: self.vote_ciphertext.clone(),
            nullifier: self.nullifier,
            proof: self.vote_proof.clone(),
        }
    }

    pub fn registration_tx(&self) -> Transaction {
        Transaction::Registration {
            commitment: self.credential.commitment(),
            presentation: self.presentation.clone(),
        }
    }

    pub fn share_tx(&self) -> Transaction {
        Transaction::TallyShare {
            election_id: *self.config.election_id(),
            partial: self.partial.clone(),
            proof: self.share_proof.to_bytes(&self.keys.pk, &self.keys.params),
        }
    }
}
