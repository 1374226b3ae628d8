//! Local-unitary invariants of pure three-qubit states.
//!
//! A state is a complex `2x2x2` tensor `t^{ijk}` ([`StateTensor`]). The crate
//! evaluates the polynomial invariants `I1..I6` and the general
//! permutation-indexed family `P_{sigma,tau}`, their gradients, tangles and
//! Schmidt data, canonical coordinates, and a randomized harness that checks
//! invariance under `U(2) x U(2) x U(2)`.

pub mod cli;
pub mod entanglement;
pub mod error;
pub mod invariants;
pub mod tensor_core;
pub mod verify;

pub use entanglement::{canonical_coordinates, make_family, schmidt, tangles, Family, TangleReport};
pub use error::{Error, Result};
pub use invariants::{compute_invariants, general_p, hyperdet_f, InvariantId, InvariantRecord, Permutation};
pub use tensor_core::{apply_local_unitary, Pair, Party, StateTensor, UnitaryTriple};
