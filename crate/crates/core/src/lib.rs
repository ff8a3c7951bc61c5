//! Simulator and verifier for three-party secret sharing over a six-qubit
//! GHZ-derived state.
//!
//! The numeric layer ([`statevector`]) evolves 64 amplitudes exactly; the
//! symbolic layer ([`symbolic`]) tracks the same states as signed basis-term
//! sums so that reconstruction can be checked term by term.

pub mod harness;
pub mod protocol;
pub mod recon;
pub mod render;
pub mod statevector;
pub mod symbolic;

pub use protocol::{
    decode_secret, encode_secret, replay, run_protocol, simulate, Announcement, GateAction, Party, Position,
    ProtocolRun, SecretBits, Transcript,
};
pub use recon::{reconstruct, ReconError, ReconstructionResult, TamperReport};
pub use statevector::{BellOutcome, BellPair, PauliGate, Qubit, SeededRng, StateLabel, Statevector};
pub use symbolic::{SymbolicState, Term};
