//! Bound states and resonances of the sub-critical Smilansky Hamiltonian.
//!
//! The spectral problem is reduced to the Birman–Schwinger condition
//! `det(I + εJ_E(λ)) = 0` for a Jacobi matrix `J_E(λ)` whose entries carry the
//! square-root branches of a sheet `E` of the resolvent's Riemann surface.
//! Eigenvalues live on the physical sheet; resonances on the others.

pub mod error;
pub mod krein;
pub mod sheets;
pub mod localred;
pub mod regions;
pub mod solvers;
pub mod spectral;

pub use error::{Error, Result};
pub use sheets::{SectorChain, SheetId};
pub use spectral::{branch_sqrt, threshold, TruncatedJacobi};
