//! Lattice translations, magnetic translations, gauge unitaries,
//! quasi-adiabatic generators and the parallel-transport propagator.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::fock::{BlockOperator, FockBasis};
use crate::lattice::Torus;
use crate::linalg::{self, CMat, C64, I};
use crate::models::{build_harper_hubbard, d_phi_hamiltonian, HarperHubbardParams};
use crate::spectral::{BlockSpectrum, FilterSpec, Interior};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum UnitaryKind {
    Identity,
    Translation,
    MagneticTranslation,
    Gauge,
    ParallelTransport,
    Composite,
}

/// Unitary acting as `U c*_y U* = e^{iθ_y} c*_{σ(y)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub sigma: Vec<usize>,
    pub theta: Vec<f64>,
    pub kind: UnitaryKind,
}

impl Monomial {
    pub fn identity(n_sites: usize) -> Self {
        Self { sigma: (0..n_sites).collect(), theta: alloc::vec![0.0; n_sites], kind: UnitaryKind::Identity }
    }

    /// `Θ` with `Θ* c_x Θ = c_{x+e}` for `direction` 1 or 2.
    pub fn translation(lattice: &Torus, direction: u8) -> Result<Self> {
        let (d1, d2) = match direction {
            1 => (-1, 0),
            2 => (0, -1),
            _ => return Err(Error::Lattice(format!("direction {direction} is not 1 or 2"))),
        };
        let n = lattice.n_sites();
        Ok(Self {
            sigma: (0..n).map(|y| lattice.shift(y, d1, d2)).collect(),
            theta: alloc::vec![0.0; n],
            kind: UnitaryKind::Translation,
        })
    }

    /// `U* c_x U = e^{−i x2 φ} c_{x+e1}`; needs `L2 φ ∈ 2πℤ`.
    pub fn magnetic_translation(lattice: &Torus, phi: f64) -> Result<Self> {
        let wind = lattice.l2() as f64 * phi / (2.0 * PI);
        if (wind - wind.round()).abs() > 1e-12 {
            return Err(Error::Model(format!("L2 phi = 2 pi x {wind} is not a multiple of 2 pi")));
        }
        let n = lattice.n_sites();
        Ok(Self {
            sigma: (0..n).map(|y| lattice.shift(y, -1, 0)).collect(),
            theta: (0..n).map(|y| -(lattice.coords(y).1 as f64) * phi).collect(),
            kind: UnitaryKind::MagneticTranslation,
        })
    }

    /// `𝓕_ΔΦ = exp(−i ΔΦ Σ x2 q_x)`.
    pub fn gauge(lattice: &Torus, delta_phi: f64) -> Self {
        let n = lattice.n_sites();
        Self {
            sigma: (0..n).collect(),
            theta: (0..n).map(|y| -delta_phi * lattice.coords(y).1 as f64).collect(),
            kind: UnitaryKind::Gauge,
        }
    }

    /// Matrix product `self · other`.
    pub fn then(&self, other: &Self) -> Self {
        let n = self.sigma.len();
        let sigma = (0..n).map(|y| self.sigma[other.sigma[y]]).collect();
        let theta = (0..n).map(|y| other.theta[y] + self.theta[other.sigma[y]]).collect();
        let kind = if self.kind == other.kind { self.kind } else { UnitaryKind::Composite };
        Self { sigma, theta, kind }
    }

    pub fn pow(&self, k: usize) -> Self {
        let mut out = Self::identity(self.sigma.len());
        out.kind = self.kind;
        for _ in 0..k {
            out = self.then(&out);
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        let n = self.sigma.len();
        let mut sigma = alloc::vec![0; n];
        let mut theta = alloc::vec![0.0; n];
        for y in 0..n {
            sigma[self.sigma[y]] = y;
            theta[self.sigma[y]] = -self.theta[y];
        }
        Self { sigma, theta, kind: self.kind }
    }

    /// One-particle matrix `u_{σ(y), y} = e^{iθ_y}`.
    pub fn one_particle(&self) -> CMat {
        let n = self.sigma.len();
        let mut u = CMat::zeros(n, n);
        for y in 0..n {
            u[(self.sigma[y], y)] = C64::from_polar(1.0, self.theta[y]);
        }
        u
    }

    /// `U|n> = amp |n'>`.
    pub fn image(&self, state: u64) -> (C64, u64) {
        let mut targets: Vec<usize> = Vec::new();
        let mut phase = 0.0;
        let mut rest = state;
        while rest != 0 {
            let y = rest.trailing_zeros() as usize;
            targets.push(self.sigma[y]);
            phase += self.theta[y];
            rest &= rest - 1;
        }
        let mut inversions = 0usize;
        for i in 0..targets.len() {
            for j in (i + 1)..targets.len() {
                if targets[i] > targets[j] {
                    inversions += 1;
                }
            }
        }
        let image = targets.iter().fold(0u64, |acc, &x| acc | (1u64 << x));
        let sign = if inversions % 2 == 0 { 1.0 } else { -1.0 };
        (C64::from_polar(sign, phase), image)
    }

    pub fn to_block(&self, basis: &FockBasis) -> BlockOperator {
        let blocks = basis
            .sectors()
            .iter()
            .map(|s| {
                let mut m = CMat::zeros(s.dim(), s.dim());
                for (j, &st) in s.states().iter().enumerate() {
                    let (amp, img) = self.image(st);
                    let i = s.index(img).expect("number conserving");
                    m[(i, j)] = amp;
                }
                m
            })
            .collect();
        BlockOperator { blocks, support: None }
    }
}

/// A number-conserving unitary on a Fock basis.
#[derive(Debug, Clone)]
pub struct LatticeUnitary {
    pub kind: UnitaryKind,
    pub op: BlockOperator,
    pub monomial: Option<Monomial>,
}

impl LatticeUnitary {
    pub fn from_monomial(m: Monomial, basis: &FockBasis) -> Self {
        Self { kind: m.kind, op: m.to_block(basis), monomial: Some(m) }
    }

    pub fn identity(basis: &FockBasis) -> Self {
        Self::from_monomial(Monomial::identity(basis.n_sites()), basis)
    }

    pub fn unitarity_residual(&self) -> f64 {
        self.op.unitarity_residual()
    }

    /// Matrix product `self · other`.
    pub fn then(&self, other: &Self) -> Result<Self> {
        let monomial = match (&self.monomial, &other.monomial) {
            (Some(a), Some(b)) => Some(a.then(b)),
            _ => None,
        };
        let kind = if self.kind == other.kind { self.kind } else { UnitaryKind::Composite };
        Ok(Self { kind, op: self.op.mul(&other.op)?, monomial })
    }
}

/// `Θ` on a basis.
pub fn translation(lattice: &Torus, basis: &FockBasis, direction: u8) -> Result<LatticeUnitary> {
    Ok(LatticeUnitary::from_monomial(Monomial::translation(lattice, direction)?, basis))
}

pub fn magnetic_translation(lattice: &Torus, basis: &FockBasis, phi: f64) -> Result<LatticeUnitary> {
    Ok(LatticeUnitary::from_monomial(Monomial::magnetic_translation(lattice, phi)?, basis))
}

pub fn gauge_unitary(lattice: &Torus, basis: &FockBasis, delta_phi: f64) -> LatticeUnitary {
    LatticeUnitary::from_monomial(Monomial::gauge(lattice, delta_phi), basis)
}

/// Filter and gap settings for quasi-adiabatic generators.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct GeneratorOptions {
    #[cfg_attr(feature = "serde", serde(default))]
    pub interior: Interior,
    /// Filter threshold; `None` uses the gap at each flux value.
    #[cfg_attr(feature = "serde", serde(default))]
    pub gamma: Option<f64>,
    /// Smallest admissible gap along the path.
    #[cfg_attr(feature = "serde", serde(default = "default_gap_floor"))]
    pub gap_floor: f64,
}

fn default_gap_floor() -> f64 {
    1e-3
}

impl Default for GeneratorOptions {
    fn default() -> Self {
        Self { interior: Interior::Smooth, gamma: None, gap_floor: default_gap_floor() }
    }
}

/// A gapped family `Φ ↦ H_Φ` with its quasi-adiabatic generator.
pub trait FluxFamily {
    /// `A_Φ` with `A_jk = −i f(E_j − E_k) (∂_Φ H)_jk`.
    fn generator(&self, phi: f64) -> Result<BlockOperator>;
    /// Ground-state projector `P_Φ`.
    fn projector(&self, phi: f64) -> Result<BlockOperator>;
}

/// `A = −i f(ad_H)(∂H)` given a spectrum, a gap and the derivative.
pub fn filtered_generator(spectrum: &BlockSpectrum, dh: &BlockOperator, gamma: f64, interior: Interior) -> Result<BlockOperator> {
    let filter = FilterSpec::new(gamma)?.with_interior(interior);
    Ok(spectrum.filter(dh, |w| -I * filter.f(w)))
}

/// Interacting Harper-Hubbard family on a Fock basis.
#[derive(Debug, Clone)]
pub struct ManyBodyFlux {
    pub lattice: Torus,
    pub params: HarperHubbardParams,
    pub basis: FockBasis,
    /// Restricts the ground state to this particle number.
    pub particles: Option<usize>,
    pub hint: Option<usize>,
    pub options: GeneratorOptions,
}

impl ManyBodyFlux {
    fn spectrum(&self, phi: f64) -> Result<(BlockSpectrum, crate::spectral::GroundProjection)> {
        let h = build_harper_hubbard(&self.lattice, &self.params.with_flux(phi), &self.basis)?;
        let spectrum = BlockSpectrum::new(&h.blocks(&self.basis)?)?;
        let proj = match self.particles {
            Some(n) => spectrum.projection_in(self.basis.block_of(n).ok_or(Error::MissingSector(n))?, self.hint, 8)?,
            None => spectrum.projection(self.hint, 8)?,
        };
        if !proj.report.admissible || proj.report.gamma < self.options.gap_floor {
            return Err(Error::GapClosure(phi));
        }
        Ok((spectrum, proj))
    }
}

impl FluxFamily for ManyBodyFlux {
    fn generator(&self, phi: f64) -> Result<BlockOperator> {
        let (spectrum, proj) = self.spectrum(phi)?;
        let dh = d_phi_hamiltonian(&self.lattice, &self.params.with_flux(phi), &self.basis)?.to_block(&self.basis)?;
        filtered_generator(&spectrum, &dh, self.options.gamma.unwrap_or(proj.report.gamma), self.options.interior)
    }

    fn projector(&self, phi: f64) -> Result<BlockOperator> {
        Ok(self.spectrum(phi)?.1.projector(&self.basis))
    }
}

/// Integrator settings.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct TransportOptions {
    /// Initial number of steps over the path.
    pub steps: usize,
    /// Bound on the local error estimate `‖S_{h/2}² − S_h‖/3` of a step,
    /// per unit of flux. The accepted step is the extrapolated one, whose
    /// error is of higher order.
    pub tol: f64,
    /// Smallest step before giving up.
    pub min_step: f64,
}

impl Default for TransportOptions {
    fn default() -> Self {
        Self { steps: 16, tol: 1e-5, min_step: 1e-6 }
    }
}

/// Result of [`parallel_transport`].
#[derive(Debug, Clone)]
pub struct ParallelTransport {
    pub unitary: LatticeUnitary,
    pub steps: usize,
    pub rejected: usize,
    /// Largest accepted local error estimate.
    pub max_error: f64,
    pub unitarity_residual: f64,
}

/// One Richardson-extrapolated midpoint step from `phi` to `phi + h`.
fn richardson_step<G: FluxFamily + ?Sized>(family: &G, phi: f64, h: f64) -> Result<(BlockOperator, f64)> {
    let full = family.generator(phi + 0.5 * h)?.exp_i(-h);
    let a1 = family.generator(phi + 0.25 * h)?.exp_i(-0.5 * h);
    let a2 = family.generator(phi + 0.75 * h)?.exp_i(-0.5 * h);
    let half = a2.mul(&a1)?;
    let diff = half.sub(&full)?;
    let err = diff.norm() / 3.0;
    let extrap = half.scale(C64::new(4.0 / 3.0, 0.0)).sub(&full.scale(C64::new(1.0 / 3.0, 0.0)))?;
    let blocks = extrap.blocks.iter().map(linalg::polar_unitary).collect();
    Ok((BlockOperator { blocks, support: None }, err))
}

const ROUNDING: f64 = 64.0 * f64::EPSILON;

/// `F(Φ, Φ')` solving `i ∂_Φ F = A_Φ F` from `F(Φ', Φ') = 1`.
///
/// `observer(S, F_before)` sees every accepted step `S`, so that
/// `F_after = S · F_before`.
pub fn parallel_transport_with<G, O>(
    family: &G,
    phi: f64,
    phi_prime: f64,
    start: &BlockOperator,
    opts: &TransportOptions,
    mut observer: O,
) -> Result<ParallelTransport>
where
    G: FluxFamily + ?Sized,
    O: FnMut(&BlockOperator, &BlockOperator) -> Result<()>,
{
    let span = phi - phi_prime;
    let mut f = start.clone();
    if span == 0.0 {
        let r = f.unitarity_residual();
        return Ok(ParallelTransport {
            unitary: LatticeUnitary { kind: UnitaryKind::ParallelTransport, op: f, monomial: None },
            steps: 0,
            rejected: 0,
            max_error: 0.0,
            unitarity_residual: r,
        });
    }
    let h0 = span / opts.steps.max(1) as f64;
    let mut h = h0;
    let mut at = phi_prime;
    let mut steps = 0;
    let mut rejected = 0;
    let mut max_error = 0.0f64;
    while (phi - at) * span.signum() > 1e-14 * span.abs() {
        let last = (at + h - phi) * span.signum() >= 0.0;
        let step = if last { phi - at } else { h };
        let (s, err) = richardson_step(family, at, step)?;
        // estimates below the rounding level carry no information
        let allowed = (opts.tol * step.abs()).max(ROUNDING);
        // local error scales as h^3 against an allowance linear in h
        let factor = (0.9 * (allowed / err.max(1e-300)).sqrt()).clamp(0.25, 2.0);
        if err > allowed {
            if step.abs() <= opts.min_step {
                return Err(Error::StepFloor { phi: at, err });
            }
            h = (step * factor).abs().max(opts.min_step) * span.signum();
            rejected += 1;
            continue;
        }
        observer(&s, &f)?;
        f = s.mul(&f)?;
        max_error = max_error.max(err);
        at = if last { phi } else { at + step };
        steps += 1;
        if !last {
            h = (step * factor).abs().min(h0.abs()) * span.signum();
        }
    }
    let r = f.unitarity_residual();
    Ok(ParallelTransport {
        unitary: LatticeUnitary { kind: UnitaryKind::ParallelTransport, op: f, monomial: None },
        steps,
        rejected,
        max_error,
        unitarity_residual: r,
    })
}

pub fn parallel_transport<G: FluxFamily + ?Sized>(
    family: &G,
    phi: f64,
    phi_prime: f64,
    identity: &BlockOperator,
    opts: &TransportOptions,
) -> Result<ParallelTransport> {
    parallel_transport_with(family, phi, phi_prime, identity, opts, |_, _| Ok(()))
}

/// `‖P_Φ F − F P_{Φ'}‖`.
pub fn intertwiner_residual<G: FluxFamily + ?Sized>(family: &G, f: &BlockOperator, phi: f64, phi_prime: f64) -> Result<f64> {
    let p1 = family.projector(phi)?;
    let p0 = family.projector(phi_prime)?;
    Ok(p1.mul(f)?.sub(&f.mul(&p0)?)?.norm())
}

/// Checks `L2 (Φ' − Φ) ∈ 2πℤ` and returns the number of flux quanta.
pub fn threaded_quanta(lattice: &Torus, phi: f64, phi_prime: f64) -> Result<i64> {
    let q = lattice.l2() as f64 * (phi_prime - phi) / (2.0 * PI);
    if (q - q.round()).abs() > 1e-9 {
        return Err(Error::Model(format!("threaded flux L2 (Phi' - Phi) = 2 pi x {q} is not quantized")));
    }
    Ok(q.round() as i64)
}

/// `W = F(Φ, Φ') 𝓕_{Φ'−Φ}`, which maps `ran(P_Φ)` to itself.
pub fn flux_threading_unitary(lattice: &Torus, basis: &FockBasis, transport: &LatticeUnitary, phi: f64, phi_prime: f64) -> Result<LatticeUnitary> {
    threaded_quanta(lattice, phi, phi_prime)?;
    let gauge = gauge_unitary(lattice, basis, phi_prime - phi);
    let op = transport.op.mul(&gauge.op)?;
    Ok(LatticeUnitary { kind: UnitaryKind::Composite, op, monomial: None })
}

/// `‖A − B‖` for two block operators of the same shape.
pub fn distance(a: &BlockOperator, b: &BlockOperator) -> Result<f64> {
    Ok(a.sub(b)?.norm())
}
