//! Classical sampling of high-temperature quantum Gibbs states.
//!
//! For a local qubit Hamiltonian `H` with Pauli terms and inverse temperature
//! `β` below a degree-dependent threshold, this crate draws stabilizer product
//! states whose mixture approximates `e^{-βH}/tr e^{-βH}`. The pieces are:
//!
//! - [`pauli`]: exact phased Pauli algebra.
//! - [`hamiltonian`]: terms, the dual interaction graph and file I/O.
//! - [`monomial`]: unbiased single-monomial estimators of the propagator series.
//! - [`pinning`]: configurations of disjoint blocks `I + cX` whose mean is `e^{-βH}`.
//! - [`stabilizer`]: turning a configuration into a random product state.
//! - [`cluster`]: cluster-expansion estimate of `ln tr e^{-βH}`.
//! - [`tree_walk`]: the Markov chain that reweights pinning outcomes by their trace.
//! - [`oracle`]: dense linear algebra for checking all of the above at small `n`.

pub mod choice;
pub mod cluster;
pub mod error;
pub mod hamiltonian;
pub mod models;
pub mod monomial;
pub mod oracle;
pub mod pauli;
pub mod pinning;
pub mod sites;
pub mod stabilizer;
pub mod tree_walk;
pub mod verify;

pub use error::{Error, Result};
pub use hamiltonian::{CriticalMode, Hamiltonian, Term};
pub use pauli::{Axis, HermitianPart, PauliString, SignedPauli};
pub use sites::SiteSet;

/// Mixes a master seed with a counter into an independent 64-bit seed (SplitMix64).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
