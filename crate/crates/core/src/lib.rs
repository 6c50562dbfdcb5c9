//! Simulation and analysis of random semi-classical circuits with erasure
//! errors.
//!
//! Reversible two-bit gates (the 24 affine maps of GF(2)^2) are embedded as
//! Clifford gates; Hadamards at rate `q` make the circuit quantum. Erasure
//! errors reset a site to `|0>`, junk noise leaves it maximally mixed. The
//! crate provides a mixed-stabilizer simulator with a classical fast path,
//! exact brute-force oracles, the diffusion-reaction lattice model that the
//! averaged collision probability maps onto, seeded experiment drivers and
//! finite-size-scaling tools.

pub mod dp;
pub mod error;
pub mod experiments;
pub mod gates;
pub mod gf2;
pub mod io;
pub mod oracle;
pub mod pauli;
pub mod scaling;
pub mod schedule;
pub mod seeding;
pub mod stabilizer;
pub mod verify;
pub mod zsector;

pub use error::{Error, Result};
pub use gates::{AffineGate, PermutationTable};
pub use gf2::{BitMatrix, BitVector};
pub use pauli::{symplectic_inner, PauliString};
pub use stabilizer::{ReferenceKind, StabilizerState};
pub use zsector::ZSectorState;
