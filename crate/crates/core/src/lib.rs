//! Numerical model of the Lorentzian Einstein universe `Ein^{n-1,1}`.
//!
//! The projective quadric model lives in [`quadric`], the universal cover
//! `S^{n-1} x R` in [`cover`], its causal order in [`causal`], and the
//! maximal unipotent subgroup of `O(n,2)` with its lifted action in
//! [`unipotent`]. [`verify`] is a seeded harness that checks the closed-form
//! identities against independent oracles.

pub mod causal;
pub mod cover;
mod error;
pub mod quadric;
pub mod unipotent;
pub mod verify;

pub use error::GeomError;

pub type Result<T, E = GeomError> = std::result::Result<T, E>;

/// Default relative tolerance for null and incidence predicates.
pub const DEFAULT_TOL: f64 = 1e-9;
