use super::filter::FilterSpec;
use super::{BlockSpectrum, GroundProjection};
use crate::error::Result;
use crate::fock::{conditional_expectation, BlockOperator, FockBasis, Reference};
use crate::lattice::HalfSpace;
use crate::linalg::{C64, I};

/// `Q̄ = Q − K_− − K_+` with the filtered charge `K` split at the two
/// boundaries of the half space.
#[derive(Debug, Clone)]
pub struct DressedCharge {
    pub k: BlockOperator,
    pub k_minus: BlockOperator,
    pub k_plus: BlockOperator,
    pub q_bar: BlockOperator,
    /// `‖[Q̄, P]‖`.
    pub commutator_residual: f64,
    /// `‖K_+ − Π_{(∂_+)_(r)}(K_+)‖`.
    pub leakage: f64,
}

/// Diagnostics of the time-integral route.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TimeIntegralReport {
    pub horizon: f64,
    pub nodes: usize,
    pub omega_max: f64,
    /// `|W(T)|` at the truncation time.
    pub tail: f64,
    /// Sampled defect of the frequency interpolation.
    pub interpolation_error: f64,
}

/// `K = Ŵ(−ad_H)(i ad_H(Q))`, i.e. `K_jk = ω f(ω) Q_jk` with `ω = E_j − E_k`,
/// split as `K_− = Π_{(∂_−)_(r)}(K)`, `K_+ = K − K_−`.
pub fn quasi_adiabatic_k(
    spectrum: &BlockSpectrum,
    q: &BlockOperator,
    projection: &GroundProjection,
    filter: &FilterSpec,
    geometry: &HalfSpace,
    basis: &FockBasis,
    reference: Reference,
) -> Result<DressedCharge> {
    filter.validate()?;
    let k = spectrum.filter(q, |w| C64::new(w * filter.f(w), 0.0));
    let k_minus = conditional_expectation(&k, basis, &geometry.split_minus(), reference)?;
    let k_plus = k.sub(&k_minus)?;
    let leakage = k_plus.sub(&conditional_expectation(&k_plus, basis, &geometry.split_plus(), reference)?)?.norm();
    let q_bar = q.sub(&k_minus)?.sub(&k_plus)?;
    let commutator_residual = projection.commutator_norm(&q_bar);
    Ok(DressedCharge { k, k_minus, k_plus, q_bar, commutator_residual, leakage })
}

/// `K = ∫_{−T}^{T} W(t) e^{itH} i[H, Q] e^{−itH} dt`, evaluated in the energy
/// eigenbasis with a tabulated frequency kernel.
pub fn time_integral_k(
    spectrum: &BlockSpectrum,
    h: &BlockOperator,
    q: &BlockOperator,
    filter: &FilterSpec,
) -> Result<(BlockOperator, TimeIntegralReport)> {
    filter.validate()?;
    let x = h.commutator(q)?.scale(I);
    let omega_max = spectrum
        .blocks
        .iter()
        .filter(|e| !e.values.is_empty())
        .map(|e| e.values[e.values.len() - 1] - e.values[0])
        .fold(0.0, f64::max);
    let table = filter.kappa_table(omega_max);
    let k = spectrum.filter(&x, |w| table.eval(w));
    let report = TimeIntegralReport {
        horizon: filter.horizon(),
        nodes: table.nodes.len(),
        omega_max,
        tail: table.tail,
        interpolation_error: table.interpolation_error(32),
    };
    Ok((k, report))
}
