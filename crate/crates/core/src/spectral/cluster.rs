use alloc::format;
use alloc::vec::Vec;

use super::filter::smooth_step;
use super::{BlockSpectrum, GroundProjection};
use crate::error::{Error, Result};
use crate::fock::{hopping_terms, BlockOperator, FockBasis};
use crate::lattice::Torus;
use crate::linalg::{self, CMat, C64, I, ONE};

/// `g = φ ⋆ θ_{(−γ/2)}` for a symmetric smooth bump of half-width `δ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothStep {
    pub gamma: f64,
    pub delta: f64,
}

impl SmoothStep {
    /// Requires `0 < δ ≤ γ/2 − Δ` so that the plateaus cover `ω ≥ −Δ` and
    /// `ω ≤ −γ + Δ`.
    pub fn new(gamma: f64, delta: f64, patch_width: f64) -> Result<Self> {
        if !(gamma > 0.0) {
            return Err(Error::Filter("gamma must be positive".into()));
        }
        if !(delta > 0.0) || delta > 0.5 * gamma - patch_width {
            return Err(Error::Filter(format!(
                "bump half-width {delta} outside (0, {}]",
                0.5 * gamma - patch_width
            )));
        }
        Ok(Self { gamma, delta })
    }

    pub fn eval(&self, w: f64) -> f64 {
        smooth_step((-0.5 * self.gamma + self.delta - w) / (2.0 * self.delta))
    }
}

/// `𝒬(O) = g(ad_H)(O)`, i.e. `𝒬(O)_jk = g(E_j − E_k) O_jk`.
pub fn clustering_map(o: &BlockOperator, spectrum: &BlockSpectrum, g: &SmoothStep) -> BlockOperator {
    spectrum.filter(o, |w| C64::new(g.eval(w), 0.0))
}

/// `max_Ω |<Ω, A B Ω> − <Ω, A P B Ω>|` over unit `Ω ∈ ran(P)`.
pub fn clustering_test(a: &BlockOperator, b: &BlockOperator, projection: &GroundProjection) -> f64 {
    let f = &projection.frame;
    let blk = projection.block;
    let bf = &b.blocks[blk] * f;
    let af = a.blocks[blk].adjoint() * f;
    let ab = af.adjoint() * &bf;
    let apb = (af.adjoint() * f) * (f.adjoint() * &bf);
    linalg::numerical_radius(&(ab - apb))
}

/// Normalized local observables with support diameter at most `radius`:
/// occupations, real and imaginary hoppings and density pairs.
pub fn local_observables(lattice: &Torus, basis: &FockBasis, radius: usize) -> Result<Vec<BlockOperator>> {
    let n = lattice.n_sites();
    let mut out = Vec::new();
    for x in 0..n {
        out.push(hopping_terms(basis, &[(x, x, ONE)]).to_block(basis)?);
        for y in (x + 1)..n {
            if lattice.dist(x, y) > radius {
                continue;
            }
            out.push(hopping_terms(basis, &[(x, y, ONE), (y, x, ONE)]).to_block(basis)?);
            out.push(hopping_terms(basis, &[(x, y, I), (y, x, -I)]).to_block(basis)?);
            let pair = BlockOperator::diagonal(basis, |s| {
                if s >> x & 1 == 1 && s >> y & 1 == 1 {
                    ONE
                } else {
                    C64::new(0.0, 0.0)
                }
            });
            out.push(pair);
        }
    }
    Ok(out)
}

/// `max_A ‖P A P − <A>_P P‖` over [`local_observables`].
pub fn toporder_test(projection: &GroundProjection, lattice: &Torus, basis: &FockBasis, radius: usize) -> Result<f64> {
    let p = projection.p();
    let mut worst = 0.0f64;
    for a in local_observables(lattice, basis, radius)? {
        let c = projection.compress(&a);
        let mean = c.trace() / C64::new(p as f64, 0.0);
        let dev = c - CMat::identity(p, p) * mean;
        worst = worst.max(linalg::norm2(&dev));
    }
    Ok(worst)
}
