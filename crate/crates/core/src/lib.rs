pub mod actors;
pub mod bigint;
pub mod codec;
pub mod credentials;
pub mod hash;
pub mod hebackend;
pub mod ledger;
pub mod netsim;
pub mod rng;
pub mod zkproofs;
