//! Perturbative analysis of a laser-driven trapped ion without the rotating
//! wave approximation.
//!
//! The crate is `no_std` (it needs `alloc`). It builds the exact chain of
//! unitary frames taking the time-dependent ion-trap Hamiltonian to the
//! time-independent balanced Hamiltonian, runs a recursive perturbation
//! engine producing constants of motion `C_n` and generators `Z_n`, evaluates
//! the closed-form first and second order results, and measures them against
//! exact diagonalization and propagation.
//!
//! Every operator lives on a truncated space `|n⟩ ⊗ {|g⟩, |e⟩}`,
//! `n ≤ n_max`; identities of the infinite-dimensional algebra are compared
//! on the interior block only (see [`SpaceConfig`]).

#![no_std]

extern crate alloc;

pub mod closed_forms;
pub mod error;
pub mod hamiltonians;
pub mod operator;
pub mod oracle;
pub mod perturbation;

pub use error::{Error, Result};
pub use hamiltonians::{BalancedParams, JCParams, ModelParams};
pub use operator::{BasisIndex, Operator, Pauli, SpaceConfig, Spin, C64};

/// Version of the numerical core, recorded in result metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
