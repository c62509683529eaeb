//! Desk-scale Lindbladian simulation built around a trajectory-inspired
//! mixture channel.
//!
//! The crate covers the whole stack: phased Pauli algebra ([`pauli`]), the
//! model format ([`model`]), exact Liouvillian channels used as ground truth
//! ([`oracle`]), the mixture channel and its trajectory backends
//! ([`trajectory`]), purification gadgets and oblivious amplitude
//! amplification on a statevector simulator ([`circuit`]), the compressed
//! Hamming-weight-cutoff segment ([`compressed`]) and gate accounting
//! ([`cost`]).

pub mod circuit;
pub mod compressed;
pub mod cost;
pub mod error;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod pauli;
pub mod trajectory;

pub use error::{Error, Result};
pub use linalg::{CMat, CVec, C64};
pub use model::Lindbladian;
pub use oracle::ChannelRep;
pub use pauli::{Pauli, PauliSum, PauliTerm, Phase};
