//! Invariant-sector machinery for bosonic Fock spaces.
//!
//! The crate is `no_std` and only needs `alloc`. It covers:
//!
//! * [`fock`]: truncated multimode Fock bases and dense ladder-operator matrices;
//! * [`polyalg`]: the polynomial algebras `su_pd(2)` / `su_pd(1,1)`, their
//!   Holstein–Primakoff dressing to `su(2)` and canonical cluster operators;
//! * [`spectral`]: multiphoton Hamiltonians, sector decomposition, exact
//!   diagonalization and unitary evolution;
//! * [`quasiclassics`]: SU(2) coherent-state variational spectra and the
//!   classical Hamiltonian flow on the coherent-state sphere;
//! * [`polarization`]: quasispin operators, biphoton clusters and the
//!   classification of unpolarized light.
#![no_std]

extern crate alloc;

pub mod error;
pub mod exact;
pub mod fock;
pub mod linalg;
pub mod polarization;
pub mod polyalg;
pub mod quasiclassics;
pub mod spectral;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Exact rational numbers used for sector labels and structure-polynomial values.
pub type Rational = num_rational::Rational64;

/// Convert an exact rational to `f64`.
pub fn rational_to_f64(x: Rational) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}
