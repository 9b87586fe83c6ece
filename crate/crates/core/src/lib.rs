//! Charge transport indices for gapped fermionic lattice systems.
//!
//! The crate is `no_std` (it needs `alloc`). It provides torus lattices and
//! half-space geometries, a Jordan-Wigner Fock space with number-conserving
//! block operators, Harper-Hubbard style Hamiltonians, gap certification,
//! quasi-adiabatic filters and flows, and the transport split that turns a
//! charge-conserving symmetry into a (possibly fractional) index.
//!
//! Free fermions have a one-particle fast path in [`free`] that reproduces the
//! many-body pipeline through second quantization.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod flows;
pub mod fock;
pub mod free;
pub mod lattice;
pub mod linalg;
pub mod models;
pub mod spectral;
pub mod transport;

pub use error::{Error, Result};
pub use linalg::{CMat, CVec, C64};
