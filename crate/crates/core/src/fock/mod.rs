//! Spinless-fermion Fock space, sector bases and the operator algebra.

mod basis;
mod condexp;
mod ops;

pub use basis::{binomial, hop, jw_sign, subsets_with_popcount, FockBasis, Sector, DEFAULT_DIM_CAP};
pub use condexp::{conditional_expectation, reorder_sign, support_profile, Reference, SupportProfile};
pub use ops::{
    charge_operator, fermion_operator, hopping_terms, occupation, scalar, second_quantize, BlockOperator,
    FermionKind, SparseOperator,
};
