//! Controller-only quantum control for a fixed bipartite interaction.
//!
//! Given a Hamiltonian on `H_c (x) H_s`, the crate computes the interface Lie
//! algebra reachable by operations on the controller `H_c` alone, decides which
//! system unitaries are implementable and which observables are
//! CQND-measurable, builds the corresponding control sequences, and simulates
//! the resulting measurements.

pub mod closure;
pub mod error;
pub mod interface;
pub mod io;
pub mod measurement;
pub mod named;
pub mod operator;
pub mod random;
pub mod schmidt;
pub mod selftest;
pub mod spin_chain;
pub mod subspace;
pub mod synthesis;
pub mod tolerance;

pub use error::{Error, Result};
pub use operator::{expm, hs_inner, tensor, traceless_part, CMatrix, CVector, Hermitian, Unitary, C64};
pub use schmidt::{schmidt_decompose, strip_locals, BipartiteHamiltonian};
pub use subspace::{member, orthonormal_extend, Membership, OperatorSubspace};
pub use tolerance::Tolerances;
