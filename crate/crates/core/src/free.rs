//! One-particle fast path for quadratic Hamiltonians.
//!
//! A quasi-free ground state is the Slater determinant of the lowest
//! `n_filled` orbitals. Number-conserving quadratic operators `dΓ(a)` and
//! second-quantized unitaries `Γ(u)` are handled through their one-particle
//! matrices; the vacuum-reference split of `dΓ(a)` onto a region is
//! `dΓ(χ a χ)`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::flows::{filtered_generator, parallel_transport_with, FluxFamily, GeneratorOptions, ParallelTransport, TransportOptions};
use crate::fock::{BlockOperator, FockBasis};
use crate::lattice::{HalfSpace, Region, Torus};
use crate::linalg::{self, CMat, Eigh, C64, ONE};
use crate::models::{build_single_particle, d_phi_single_particle, HarperHubbardParams};
use crate::spectral::{BlockSpectrum, SmoothStep};
use crate::transport::IndexReport;

/// Filled Fermi sea of a one-particle Hamiltonian.
#[derive(Debug, Clone)]
pub struct FreeFermions {
    pub h: CMat,
    pub n_filled: usize,
    pub eig: Eigh,
    /// Projector onto the occupied orbitals.
    pub fermi: CMat,
}

impl FreeFermions {
    pub fn new(h: CMat, n_filled: usize) -> Result<Self> {
        let n = h.nrows();
        if n_filled == 0 || n_filled >= n {
            return Err(Error::Model(alloc::format!("filling {n_filled} of {n} orbitals leaves no gap to measure")));
        }
        let eig = Eigh::new(&h);
        let occ = eig.vectors.columns(0, n_filled);
        let fermi = &occ * occ.adjoint();
        Ok(Self { h, n_filled, eig, fermi })
    }

    /// `ε_{N+1} − ε_N`, the many-body gap above the Slater determinant.
    pub fn gap(&self) -> f64 {
        self.eig.values[self.n_filled] - self.eig.values[self.n_filled - 1]
    }

    pub fn energy(&self) -> f64 {
        self.eig.values.iter().take(self.n_filled).sum()
    }

    /// `<dΓ(a)> = tr(P_F a)`.
    pub fn expect(&self, a: &CMat) -> C64 {
        (&self.fermi * a).trace()
    }

    /// `‖(1 − P_F) u P_F‖`, zero iff `Γ(u)` fixes the Slater determinant.
    pub fn commutator(&self, u: &CMat) -> f64 {
        let n = self.h.nrows();
        let q = CMat::identity(n, n) - &self.fermi;
        linalg::norm2(&(&q * u * &self.fermi))
    }
}

/// Indicator of a region as a diagonal matrix.
pub fn indicator(region: &Region) -> CMat {
    let n = region.n_sites();
    let mut m = CMat::zeros(n, n);
    for x in region.sites() {
        m[(x, x)] = ONE;
    }
    m
}

/// `χ_R a χ_R`.
pub fn compress(a: &CMat, region: &Region) -> CMat {
    let mut out = a.clone();
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            if !region.contains(i) || !region.contains(j) {
                out[(i, j)] = C64::new(0.0, 0.0);
            }
        }
    }
    out
}

/// Split data with `T_− = dΓ(t_minus) + scalar`.
#[derive(Debug, Clone)]
pub struct FreeSplit {
    pub a: CMat,
    pub t_minus: CMat,
    pub t_plus: CMat,
    /// `−ν/2π`.
    pub scalar: f64,
    pub nu: f64,
    pub leakage: f64,
    pub convention_residual: f64,
}

/// Geometry for one-particle splits.
#[derive(Debug, Clone)]
pub struct FreeContext {
    pub chi_gamma: CMat,
    pub minus: Region,
    pub plus: Region,
}

impl FreeContext {
    pub fn new(geometry: &HalfSpace) -> Self {
        Self { chi_gamma: indicator(&geometry.gamma), minus: geometry.split_minus(), plus: geometry.split_plus() }
    }
}

/// `u* χ_Γ u − χ_Γ`.
pub fn transported_charge(u: &CMat, chi: &CMat) -> CMat {
    u.adjoint() * chi * u - chi
}

/// `ν = arg det((1 + M)/2)`, `M = exp(2πi(χ_Γ + t))`, which is the normalized
/// Fock trace of `Γ(M)`, and the Fock-norm defect of `Γ(M) e^{−iν}`.
pub fn fix_phase(chi: &CMat, t: &CMat) -> (f64, f64) {
    let e = Eigh::new(&(chi + t));
    let mut det = C64::new(1.0, 0.0);
    let mut up = 0.0;
    let mut down = 0.0;
    for &l in e.values.iter() {
        let m = C64::from_polar(1.0, 2.0 * PI * l);
        det *= (m + 1.0) * 0.5;
        let th = linalg::wrap_angle(2.0 * PI * l);
        if th > 0.0 {
            up += th;
        } else {
            down += th;
        }
    }
    let nu = linalg::wrap_angle(det.arg());
    // eigenvalues of Γ(M) e^{−iν} are e^{i(Σ_S θ − ν)} over subsets S
    let worst = (up - nu).max(nu - down).clamp(0.0, PI);
    (nu, 2.0 * (0.5 * worst).sin())
}

fn finish(a: CMat, t_minus: CMat, nu: f64, ctx: &FreeContext) -> FreeSplit {
    let t_plus = &a - &t_minus;
    let leakage = linalg::norm2(&(&t_plus - compress(&t_plus, &ctx.plus)));
    let (_, convention_residual) = fix_phase(&ctx.chi_gamma, &t_minus);
    FreeSplit { a, t_minus, t_plus, scalar: -nu / (2.0 * PI), nu, leakage, convention_residual }
}

/// Vacuum-reference split at `∂_−` with the phase removed.
pub fn split_and_fix(a: &CMat, ctx: &FreeContext) -> FreeSplit {
    let t = compress(a, &ctx.minus);
    let (nu, _) = fix_phase(&ctx.chi_gamma, &t);
    finish(a.clone(), t, nu, ctx)
}

pub fn transport_split(u: &CMat, ctx: &FreeContext) -> FreeSplit {
    split_and_fix(&transported_charge(u, &ctx.chi_gamma), ctx)
}

/// Split of `Γ(x y)` from the splits of `Γ(x)` and `Γ(y)`.
pub fn compose(x: &FreeSplit, y_u: &CMat, y: &FreeSplit, ctx: &FreeContext) -> FreeSplit {
    let conj = |m: &CMat| y_u.adjoint() * m * y_u;
    let a = conj(&x.a) + &y.a;
    let t = conj(&x.t_minus) + &y.t_minus;
    finish(a, t, x.nu + y.nu, ctx)
}

pub fn power_split(u: &CMat, split: &FreeSplit, n: usize, ctx: &FreeContext) -> Result<FreeSplit> {
    if n == 0 {
        return Err(Error::Model("power must be positive".into()));
    }
    let mut acc = split.clone();
    for _ in 1..n {
        acc = compose(&acc, u, split, ctx);
    }
    Ok(acc)
}

/// `Tr(P T_−) = tr(P_F t_−) − ν/2π` for the Slater determinant (`p = 1`).
pub fn index(sys: &FreeFermions, split: &FreeSplit, u: Option<&CMat>) -> IndexReport {
    let tr = sys.expect(&split.t_minus) + split.scalar;
    IndexReport {
        index: tr.re,
        p: 1,
        p_index: tr.re,
        integer_distance: linalg::integer_distance(tr.re),
        imag: tr.im,
        nu: split.nu,
        commutator: u.map(|u| sys.commutator(u)),
        gap_admissible: sys.gap() > 0.0,
    }
}

fn single(m: CMat) -> BlockOperator {
    BlockOperator { blocks: vec![m], support: None }
}

/// Free Harper family with its one-particle generator.
#[derive(Debug, Clone)]
pub struct FreeFlux {
    pub lattice: Torus,
    pub params: HarperHubbardParams,
    pub n_filled: usize,
    pub options: GeneratorOptions,
}

impl FreeFlux {
    pub fn system(&self, phi: f64) -> Result<FreeFermions> {
        let sys = FreeFermions::new(build_single_particle(&self.lattice, &self.params.with_flux(phi))?, self.n_filled)?;
        if sys.gap() < self.options.gap_floor {
            return Err(Error::GapClosure(phi));
        }
        Ok(sys)
    }

    /// One-particle generator `a_Φ = −i f(ad_h)(∂_Φ h)`.
    pub fn one_particle_generator(&self, phi: f64) -> Result<CMat> {
        let sys = self.system(phi)?;
        let spectrum = BlockSpectrum { blocks: vec![sys.eig.clone()] };
        let dh = single(d_phi_single_particle(&self.lattice, &self.params.with_flux(phi)));
        let gamma = self.options.gamma.unwrap_or(sys.gap());
        let a = filtered_generator(&spectrum, &dh, gamma, self.options.interior)?;
        Ok(a.blocks.into_iter().next().expect("one block"))
    }
}

impl FluxFamily for FreeFlux {
    fn generator(&self, phi: f64) -> Result<BlockOperator> {
        Ok(single(self.one_particle_generator(phi)?))
    }

    fn projector(&self, phi: f64) -> Result<BlockOperator> {
        Ok(single(self.system(phi)?.fermi))
    }
}

/// One-particle `f(Φ, Φ')`.
pub fn parallel_transport(family: &FreeFlux, phi: f64, phi_prime: f64, opts: &TransportOptions) -> Result<(CMat, ParallelTransport)> {
    let n = family.lattice.n_sites();
    let id = single(CMat::identity(n, n));
    let run = parallel_transport_with(family, phi, phi_prime, &id, opts, |_, _| Ok(()))?;
    Ok((run.unitary.op.blocks[0].clone(), run))
}

/// Transport and its split accumulated step by step.
pub fn stepwise_split(
    family: &FreeFlux,
    phi: f64,
    phi_prime: f64,
    opts: &TransportOptions,
    ctx: &FreeContext,
) -> Result<(CMat, ParallelTransport, FreeSplit)> {
    let n = family.lattice.n_sites();
    let mut t = CMat::zeros(n, n);
    let mut nu = 0.0;
    let id = single(CMat::identity(n, n));
    let run = parallel_transport_with(family, phi, phi_prime, &id, opts, |s, prev| {
        let s = &s.blocks[0];
        let prev = &prev.blocks[0];
        let raw = compress(&transported_charge(s, &ctx.chi_gamma), &ctx.minus);
        let (nu_s, _) = fix_phase(&ctx.chi_gamma, &raw);
        t += prev.adjoint() * raw * prev;
        nu += nu_s;
        Ok(())
    })?;
    let f = run.unitary.op.blocks[0].clone();
    let a = transported_charge(&f, &ctx.chi_gamma);
    let split = finish(a, t, nu, ctx);
    Ok((f, run, split))
}

/// `Γ(u)` on a Fock basis: `<m|Γ(u)|n> = det u[m, n]`.
pub fn second_quantize_unitary(u: &CMat, basis: &FockBasis) -> BlockOperator {
    let sites = |s: u64| -> Vec<usize> { (0..64).filter(|&x| s >> x & 1 == 1).collect() };
    let blocks = basis
        .sectors()
        .iter()
        .map(|sec| {
            let d = sec.dim();
            let k = sec.particles();
            let occ: Vec<Vec<usize>> = sec.states().iter().map(|&s| sites(s)).collect();
            let mut m = CMat::zeros(d, d);
            for (i, oi) in occ.iter().enumerate() {
                for (j, oj) in occ.iter().enumerate() {
                    let sub = CMat::from_fn(k, k, |a, b| u[(oi[a], oj[b])]);
                    m[(i, j)] = linalg::det(&sub);
                }
            }
            m
        })
        .collect();
    BlockOperator { blocks, support: None }
}

/// Connected correlation `<dΓ(α) dΓ(β)> − <dΓ(α)><dΓ(β)> = tr(α (1−P_F) β P_F)`.
pub fn connected_correlation(sys: &FreeFermions, alpha: &CMat, beta: &CMat) -> C64 {
    let n = sys.h.nrows();
    let q = CMat::identity(n, n) - &sys.fermi;
    (alpha * q * beta * &sys.fermi).trace()
}

/// `|<q_x q_y> − <q_x><q_y>|`.
pub fn density_clustering(sys: &FreeFermions, x: usize, y: usize) -> f64 {
    let n = sys.h.nrows();
    let mut a = CMat::zeros(n, n);
    a[(x, x)] = ONE;
    let mut b = CMat::zeros(n, n);
    b[(y, y)] = ONE;
    connected_correlation(sys, &a, &b).norm()
}

/// One-particle image of `𝒬` on quadratic operators: `g(ad_h)(o)`.
pub fn clustering_map(sys: &FreeFermions, o: &CMat, g: &SmoothStep) -> CMat {
    let e = &sys.eig;
    let mut m = e.to_eigenbasis(o);
    for j in 0..m.nrows() {
        for k in 0..m.ncols() {
            m[(j, k)] *= g.eval(e.values[j] - e.values[k]);
        }
    }
    e.from_eigenbasis(&m)
}

/// `(‖𝒬(O) P‖, ‖P 𝒬(O) − P O (1 − P)‖)` for `O = dΓ(o)` in the Slater state.
pub fn clustering_identities(sys: &FreeFermions, o: &CMat, g: &SmoothStep) -> (f64, f64) {
    let e = &sys.eig;
    let nf = sys.n_filled;
    let n = o.nrows();
    let ob = e.to_eigenbasis(o);
    let qb = e.to_eigenbasis(&clustering_map(sys, o, g));
    let diag: C64 = (0..nf).map(|i| qb[(i, i)]).sum();
    let mut kill = diag.norm_sqr();
    let mut adj = diag.norm_sqr();
    for a in nf..n {
        for i in 0..nf {
            kill += qb[(a, i)].norm_sqr();
            adj += (qb[(i, a)] - ob[(i, a)]).norm_sqr();
        }
    }
    (kill.sqrt(), adj.sqrt())
}
