//! Transported charge, its split at the two boundaries of a half space, the
//! phase fix, composition, indices, winding and sector resolution.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::flows::{parallel_transport_with, FluxFamily, ParallelTransport, TransportOptions};
use crate::fock::{charge_operator, conditional_expectation, BlockOperator, FockBasis, Reference};
use crate::lattice::HalfSpace;
use crate::linalg::{self, CMat, Eigh, C64};
use crate::spectral::{DressedCharge, GroundProjection};

/// Where and how operators are split.
#[derive(Debug, Clone)]
pub struct SplitContext<'a> {
    pub basis: &'a FockBasis,
    pub geometry: &'a HalfSpace,
    pub reference: Reference,
    pub q_gamma: BlockOperator,
}

impl<'a> SplitContext<'a> {
    /// Uses the vacuum reference, which keeps the natural branch of `ν`.
    pub fn new(basis: &'a FockBasis, geometry: &'a HalfSpace) -> Self {
        Self::with_reference(basis, geometry, Reference::Vacuum)
    }

    pub fn with_reference(basis: &'a FockBasis, geometry: &'a HalfSpace, reference: Reference) -> Self {
        let q_gamma = charge_operator(basis, &geometry.gamma);
        Self { basis, geometry, reference, q_gamma }
    }
}

/// `A = U* Q_Γ U − Q_Γ = T_− + T_+` with the phase-fixed minus part.
#[derive(Debug, Clone)]
pub struct TransportSplit {
    pub a: BlockOperator,
    pub t_minus: BlockOperator,
    pub t_plus: BlockOperator,
    /// Phase removed from the minus part, in `(−π, π]` per elementary split.
    pub nu: f64,
    /// `‖T_+ − Π_{(∂_+)_(r)}(T_+)‖`.
    pub leakage: f64,
    /// `‖exp(2πi(Q_Γ + T_−)) − 1‖`.
    pub convention_residual: f64,
}

/// Summary of a split for reports.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SplitDiagnostics {
    pub nu: f64,
    pub leakage: f64,
    pub convention_residual: f64,
    pub a_norm: f64,
    pub t_minus_norm: f64,
}

impl TransportSplit {
    pub fn diagnostics(&self) -> SplitDiagnostics {
        SplitDiagnostics {
            nu: self.nu,
            leakage: self.leakage,
            convention_residual: self.convention_residual,
            a_norm: self.a.norm(),
            t_minus_norm: self.t_minus.norm(),
        }
    }
}

/// `U* Q_Γ U − Q_Γ`.
pub fn transported_charge(u: &BlockOperator, q_gamma: &BlockOperator) -> Result<BlockOperator> {
    q_gamma.conjugate_by(u)?.sub(q_gamma)
}

/// Spectrum of the Hermitian `Q_Γ + T` block by block.
fn spectrum_of(q_gamma: &BlockOperator, t: &BlockOperator) -> Result<Vec<Vec<f64>>> {
    let m = q_gamma.add(t)?;
    Ok(m.blocks.iter().map(|b| Eigh::new(b).values).collect())
}

/// `arg` of the normalized trace of `exp(2πi(Q_Γ + T))` over the blocks
/// present, in `(−π, π]`, and the modulus of that trace.
pub fn fix_phase(q_gamma: &BlockOperator, t: &BlockOperator) -> Result<(f64, f64)> {
    let spectrum = spectrum_of(q_gamma, t)?;
    let mut acc = C64::new(0.0, 0.0);
    let mut n = 0usize;
    for vals in &spectrum {
        for &l in vals {
            acc += C64::from_polar(1.0, 2.0 * PI * l);
            n += 1;
        }
    }
    let mean = acc / n.max(1) as f64;
    Ok((linalg::wrap_angle(mean.arg()), mean.norm()))
}

/// `max |e^{2πiλ} − 1|` over the spectrum of `Q_Γ + T`.
pub fn convention_residual(q_gamma: &BlockOperator, t: &BlockOperator) -> Result<f64> {
    let spectrum = spectrum_of(q_gamma, t)?;
    Ok(spectrum
        .iter()
        .flatten()
        .map(|&l| (C64::from_polar(1.0, 2.0 * PI * l) - 1.0).norm())
        .fold(0.0, f64::max))
}

fn leakage(t_plus: &BlockOperator, ctx: &SplitContext) -> Result<f64> {
    let pi = conditional_expectation(t_plus, ctx.basis, &ctx.geometry.split_plus(), ctx.reference)?;
    Ok(t_plus.sub(&pi)?.norm())
}

/// Splits `A` at `∂_−`, removes the phase `ν` and records diagnostics.
pub fn split_and_fix(a: &BlockOperator, ctx: &SplitContext) -> Result<TransportSplit> {
    let raw = conditional_expectation(a, ctx.basis, &ctx.geometry.split_minus(), ctx.reference)?;
    let (nu, _) = fix_phase(&ctx.q_gamma, &raw)?;
    let t_minus = raw.add_scalar(C64::new(-nu / (2.0 * PI), 0.0));
    let t_plus = a.sub(&t_minus)?;
    let leakage = leakage(&t_plus, ctx)?;
    let convention_residual = convention_residual(&ctx.q_gamma, &t_minus)?;
    Ok(TransportSplit { a: a.clone(), t_minus, t_plus, nu, leakage, convention_residual })
}

/// Split of a single unitary.
pub fn transport_split(u: &BlockOperator, ctx: &SplitContext) -> Result<TransportSplit> {
    split_and_fix(&transported_charge(u, &ctx.q_gamma)?, ctx)
}

/// Split of `X · Y` from those of `X` and `Y`:
/// `T(XY)_− = Y* T(X)_− Y + T(Y)_−`, and the phases add.
pub fn compose_transport(x: &TransportSplit, y_op: &BlockOperator, y: &TransportSplit, ctx: &SplitContext) -> Result<TransportSplit> {
    let a = x.a.conjugate_by(y_op)?.add(&y.a)?;
    let t_minus = x.t_minus.conjugate_by(y_op)?.add(&y.t_minus)?;
    let t_plus = a.sub(&t_minus)?;
    let leakage = leakage(&t_plus, ctx)?;
    let convention_residual = convention_residual(&ctx.q_gamma, &t_minus)?;
    Ok(TransportSplit { a, t_minus, t_plus, nu: x.nu + y.nu, leakage, convention_residual })
}

/// Split of `U^n` by repeated composition.
pub fn power_split(u: &BlockOperator, split: &TransportSplit, n: usize, ctx: &SplitContext) -> Result<TransportSplit> {
    if n == 0 {
        return Err(Error::Model("power must be positive".into()));
    }
    let mut acc = split.clone();
    for _ in 1..n {
        acc = compose_transport(&acc, u, split, ctx)?;
    }
    Ok(acc)
}

/// Parallel transport together with the split accumulated step by step:
/// each step `S` contributes `F* (Π_{(∂_−)_(r)}(S* Q_Γ S − Q_Γ) − ν_S/2π) F`.
pub fn stepwise_split<G: FluxFamily + ?Sized>(
    family: &G,
    phi: f64,
    phi_prime: f64,
    opts: &TransportOptions,
    ctx: &SplitContext,
) -> Result<(ParallelTransport, TransportSplit)> {
    let minus = ctx.geometry.split_minus();
    let mut t_minus = BlockOperator::zeros(ctx.basis);
    let mut nu = 0.0;
    let identity = BlockOperator::identity(ctx.basis);
    let run = parallel_transport_with(family, phi, phi_prime, &identity, opts, |s, prev| {
        let a_s = transported_charge(s, &ctx.q_gamma)?;
        let raw = conditional_expectation(&a_s, ctx.basis, &minus, ctx.reference)?;
        let (nu_s, _) = fix_phase(&ctx.q_gamma, &raw)?;
        let t_s = raw.add_scalar(C64::new(-nu_s / (2.0 * PI), 0.0));
        t_minus = t_minus.add(&t_s.conjugate_by(prev)?)?;
        nu += nu_s;
        Ok(())
    })?;
    let a = transported_charge(&run.unitary.op, &ctx.q_gamma)?;
    let t_plus = a.sub(&t_minus)?;
    let leakage = leakage(&t_plus, ctx)?;
    let convention_residual = convention_residual(&ctx.q_gamma, &t_minus)?;
    Ok((run, TransportSplit { a, t_minus, t_plus, nu, leakage, convention_residual }))
}

/// `Ind = Tr(P T_−)/p`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IndexReport {
    pub index: f64,
    pub p: usize,
    /// `p · Ind`.
    pub p_index: f64,
    pub integer_distance: f64,
    /// Imaginary part of `Tr(P T_−)`, zero up to rounding.
    pub imag: f64,
    pub nu: f64,
    /// `‖[U, P]‖`, when the unitary is at hand.
    pub commutator: Option<f64>,
    pub gap_admissible: bool,
}

pub fn index(projection: &GroundProjection, split: &TransportSplit) -> IndexReport {
    let tr = projection.trace(&split.t_minus);
    let p = projection.p();
    IndexReport {
        index: tr.re / p as f64,
        p,
        p_index: tr.re,
        integer_distance: linalg::integer_distance(tr.re),
        imag: tr.im,
        nu: split.nu,
        commutator: None,
        gap_admissible: projection.report.admissible,
    }
}

/// `‖(1 − P) U P‖ + ‖(1 − P) U* P‖`, zero iff `U` commutes with `P`.
pub fn projection_commutator(u: &BlockOperator, projection: &GroundProjection) -> f64 {
    let f = &projection.frame;
    let b = projection.block;
    let leak = |m: &CMat| {
        let uf = m * f;
        let out = &uf - f * (f.adjoint() * &uf);
        linalg::norm2(&out)
    };
    leak(&u.blocks[b]) + leak(&u.blocks[b].adjoint())
}

/// Index of `U` with respect to `P`, including `‖[U, P]‖`.
pub fn index_of(u: &BlockOperator, projection: &GroundProjection, ctx: &SplitContext) -> Result<(TransportSplit, IndexReport)> {
    let split = transport_split(u, ctx)?;
    let mut report = index(projection, &split);
    report.commutator = Some(projection_commutator(u, projection));
    Ok((split, report))
}

/// Winding of `φ ↦ det_P 𝒵_−(φ)`, `𝒵_−(φ) = P e^{iφ Q̄^U_−} e^{−iφ Q̄_−} P`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WindingReport {
    pub winding: f64,
    pub p_index: f64,
    pub residual: f64,
    pub det_end: (f64, f64),
    pub det_residual: f64,
    pub grid_points: usize,
    pub largest_jump: f64,
}

/// Options for [`winding_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct WindingOptions {
    pub grid: usize,
    /// Refine until consecutive phases differ by less than this.
    pub max_jump: f64,
    pub max_points: usize,
}

impl Default for WindingOptions {
    fn default() -> Self {
        Self { grid: 64, max_jump: 0.5, max_points: 1 << 14 }
    }
}

/// `Q̄_− = Q_{Λ_−} − K_−`, `Q̄^U_− = Q_{Λ_−} + T_− − U* K_− U`.
pub fn winding_check(
    u: &BlockOperator,
    split: &TransportSplit,
    dressed: &DressedCharge,
    projection: &GroundProjection,
    ctx: &SplitContext,
    p_index: f64,
    opts: &WindingOptions,
) -> Result<WindingReport> {
    let b = projection.block;
    let q_lambda = charge_operator(ctx.basis, &ctx.geometry.lambda_minus);
    let q_bar = q_lambda.sub(&dressed.k_minus)?;
    let q_bar_u = q_lambda.add(&split.t_minus)?.sub(&dressed.k_minus.conjugate_by(u)?)?;
    let e0 = Eigh::new(&q_bar.blocks[b]);
    let e1 = Eigh::new(&q_bar_u.blocks[b]);
    let f = &projection.frame;
    // e^{−iφX} F = V e^{−iφλ} V* F
    let v0f = e0.vectors.adjoint() * f;
    let v1f = e1.vectors.adjoint() * f;
    let overlap = v1f.adjoint();
    let middle = e1.vectors.adjoint() * &e0.vectors;
    let det_at = |phi: f64| -> C64 {
        let mut left = v0f.clone();
        for (i, mut row) in left.row_iter_mut().enumerate() {
            row *= C64::from_polar(1.0, -phi * e0.values[i]);
        }
        let mut mid = &middle * left;
        for (i, mut row) in mid.row_iter_mut().enumerate() {
            row *= C64::from_polar(1.0, phi * e1.values[i]);
        }
        linalg::det(&(&overlap * mid))
    };
    let n0 = opts.grid.max(4);
    let mut pts: Vec<(f64, C64)> = (0..=n0).map(|k| {
        let phi = 2.0 * PI * k as f64 / n0 as f64;
        (phi, det_at(phi))
    }).collect();
    loop {
        let mut refined = Vec::with_capacity(pts.len() * 2);
        let mut changed = false;
        for w in pts.windows(2) {
            refined.push(w[0]);
            let jump = (w[1].1 / w[0].1).arg().abs();
            if jump > opts.max_jump {
                let mid = 0.5 * (w[0].0 + w[1].0);
                refined.push((mid, det_at(mid)));
                changed = true;
            }
        }
        refined.push(*pts.last().expect("grid is not empty"));
        pts = refined;
        if !changed {
            break;
        }
        if pts.len() > opts.max_points {
            return Err(Error::Winding(format!("{} grid points", pts.len())));
        }
    }
    let mut total = 0.0;
    let mut largest = 0.0f64;
    for w in pts.windows(2) {
        if w[0].1.norm() < 1e-12 || w[1].1.norm() < 1e-12 {
            return Err(Error::Winding("determinant vanishes on the grid".into()));
        }
        let d = (w[1].1 / w[0].1).arg();
        largest = largest.max(d.abs());
        total += d;
    }
    let winding = total / (2.0 * PI);
    let end = pts.last().expect("grid is not empty").1;
    Ok(WindingReport {
        winding,
        p_index,
        residual: (winding - p_index).abs(),
        det_end: (end.re, end.im),
        det_residual: (end - 1.0).norm(),
        grid_points: pts.len(),
        largest_jump: largest,
    })
}

/// Resolution of `ran(P)` into sectors by local order parameters.
#[derive(Debug, Clone)]
pub struct Sectors {
    pub block: usize,
    /// Orthonormal frames, one per sector, in the block of `P`.
    pub frames: Vec<CMat>,
    /// Order-parameter value of each sector (first parameter).
    pub values: Vec<f64>,
    /// Smallest distance between sector values relative to their spread.
    pub separation: f64,
}

impl Sectors {
    pub fn ranks(&self) -> Vec<usize> {
        self.frames.iter().map(|f| f.ncols()).collect()
    }

    pub fn projection(&self, m: usize, base: &GroundProjection) -> GroundProjection {
        GroundProjection { frame: self.frames[m].clone(), block: self.block, report: base.report.clone() }
    }

    /// Frame of a union of sectors.
    pub fn union_projection(&self, ms: &[usize], base: &GroundProjection) -> GroundProjection {
        let rows = self.frames[0].nrows();
        let cols: usize = ms.iter().map(|&m| self.frames[m].ncols()).sum();
        let mut frame = CMat::zeros(rows, cols);
        let mut at = 0;
        for &m in ms {
            let f = &self.frames[m];
            frame.columns_mut(at, f.ncols()).copy_from(f);
            at += f.ncols();
        }
        GroundProjection { frame, block: self.block, report: base.report.clone() }
    }
}

/// Diagonalizes a generic combination of `P O_i P` and groups eigenvalues.
pub fn sector_decompose(projection: &GroundProjection, order_params: &[BlockOperator], tol: f64) -> Result<Sectors> {
    if order_params.is_empty() {
        return Err(Error::Sectors("no order parameters".into()));
    }
    let p = projection.p();
    let compressed: Vec<CMat> = order_params.iter().map(|o| projection.compress(o)).collect();
    let weights = [1.0, 0.6180339887, 0.4142135623, 0.2360679775];
    let mut mix = CMat::zeros(p, p);
    for (i, c) in compressed.iter().enumerate() {
        mix += c * C64::new(weights[i % weights.len()] / (1 + i / weights.len()) as f64, 0.0);
    }
    let mix = (&mix + mix.adjoint()) * C64::new(0.5, 0.0);
    let e = Eigh::new(&mix);
    let spread = (e.values[p - 1] - e.values[0]).abs().max(1e-300);
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in 0..p {
        match groups.last_mut() {
            Some(g) if (e.values[i] - e.values[g[g.len() - 1]]).abs() <= tol * spread.max(1.0) => g.push(i),
            _ => groups.push(alloc::vec![i]),
        }
    }
    if groups.len() < 2 {
        return Err(Error::Sectors("order parameters do not split the ground space".into()));
    }
    let mut separation = f64::INFINITY;
    for w in groups.windows(2) {
        let gap = e.values[w[1][0]] - e.values[w[0][w[0].len() - 1]];
        separation = separation.min(gap / spread);
    }
    let frames: Vec<CMat> = groups
        .iter()
        .map(|g| {
            let mut sub = CMat::zeros(p, g.len());
            for (j, &i) in g.iter().enumerate() {
                sub.set_column(j, &e.vectors.column(i));
            }
            &projection.frame * sub
        })
        .collect();
    let values = frames
        .iter()
        .map(|f| {
            let c = order_params[0].compress(projection.block, f);
            c.trace().re / f.ncols() as f64
        })
        .collect();
    Ok(Sectors { block: projection.block, frames, values, separation })
}

/// Permutation induced by `U` on the sectors, from `ρ_m(l) = ‖F_l* U F_m‖²/p_m`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SectorPermutation {
    pub image: Vec<usize>,
    pub weights: Vec<Vec<f64>>,
    /// `max_m ‖U P_m U* − P_{π(m)}‖`.
    pub residual: f64,
    pub cycles: Vec<Vec<usize>>,
}

impl SectorPermutation {
    pub fn cycle_of(&self, m: usize) -> &[usize] {
        self.cycles.iter().find(|c| c.contains(&m)).expect("every sector lies on a cycle")
    }

    pub fn is_transposition(&self) -> bool {
        let moved: Vec<&Vec<usize>> = self.cycles.iter().filter(|c| c.len() > 1).collect();
        moved.len() == 1 && moved[0].len() == 2
    }
}

pub fn sector_permutation(u: &BlockOperator, sectors: &Sectors) -> Result<SectorPermutation> {
    let ub = &u.blocks[sectors.block];
    let k = sectors.frames.len();
    let mut weights = alloc::vec![alloc::vec![0.0; k]; k];
    let mut image = alloc::vec![0; k];
    for m in 0..k {
        let uf = ub * &sectors.frames[m];
        let pm = sectors.frames[m].ncols() as f64;
        for l in 0..k {
            let o = sectors.frames[l].adjoint() * &uf;
            weights[m][l] = o.iter().map(|z| z.norm_sqr()).sum::<f64>() / pm;
        }
        let best = (0..k)
            .max_by(|&a, &b| weights[m][a].partial_cmp(&weights[m][b]).unwrap())
            .expect("at least one sector");
        image[m] = best;
    }
    let mut seen = alloc::vec![false; k];
    for &i in &image {
        if seen[i] {
            return Err(Error::Sectors("U does not permute the sectors".into()));
        }
        seen[i] = true;
    }
    let mut residual = 0.0f64;
    for m in 0..k {
        let uf = ub * &sectors.frames[m];
        let moved = &uf * uf.adjoint();
        let target = &sectors.frames[image[m]] * sectors.frames[image[m]].adjoint();
        residual = residual.max(linalg::norm2(&(moved - target)));
    }
    let mut cycles = Vec::new();
    let mut done = alloc::vec![false; k];
    for start in 0..k {
        if done[start] {
            continue;
        }
        let mut cyc = Vec::new();
        let mut m = start;
        while !done[m] {
            done[m] = true;
            cyc.push(m);
            m = image[m];
        }
        cycles.push(cyc);
    }
    Ok(SectorPermutation { image, weights, residual, cycles })
}

/// `max_{m ≠ m'} ‖P_{m'} O P_m‖` over the given local observables.
pub fn sector_mixing(observables: &[BlockOperator], sectors: &Sectors) -> f64 {
    let mut worst = 0.0f64;
    for o in observables {
        let ob = &o.blocks[sectors.block];
        for (m, fm) in sectors.frames.iter().enumerate() {
            let of = ob * fm;
            for (l, fl) in sectors.frames.iter().enumerate() {
                if l != m {
                    worst = worst.max(linalg::norm2(&(fl.adjoint() * &of)));
                }
            }
        }
    }
    worst
}

/// Index of a sector in both variants.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SectorIndex {
    pub sector: usize,
    pub cycle_length: usize,
    pub rank: usize,
    /// `Tr(P_m T(U^ℓ)_−)/p_m`.
    pub power_index: f64,
    /// `p_m · power_index`.
    pub power_integer_distance: f64,
    /// `Tr(P_cyc T(U)_−)/(ℓ p_m)`.
    pub cycle_index: f64,
    /// `ℓ p_m · cycle_index`.
    pub cycle_integer_distance: f64,
}

/// Sector indices via `U^ℓ` on `P_m` and via `U` on the cycle of `m`.
pub fn sector_index(
    u: &BlockOperator,
    split: &TransportSplit,
    base: &GroundProjection,
    sectors: &Sectors,
    perm: &SectorPermutation,
    m: usize,
    ctx: &SplitContext,
) -> Result<SectorIndex> {
    let cyc = perm.cycle_of(m).to_vec();
    let ell = cyc.len();
    let rank = sectors.frames[m].ncols();
    let pow = power_split(u, split, ell, ctx)?;
    let pm = sectors.projection(m, base);
    let power = pm.trace(&pow.t_minus).re;
    let pc = sectors.union_projection(&cyc, base);
    let cycle = pc.trace(&split.t_minus).re;
    Ok(SectorIndex {
        sector: m,
        cycle_length: ell,
        rank,
        power_index: power / rank as f64,
        power_integer_distance: linalg::integer_distance(power),
        cycle_index: cycle / (ell * rank) as f64,
        cycle_integer_distance: linalg::integer_distance(cycle),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flows::translation;
    use crate::lattice::Torus;
    use crate::models::{build_harper_hubbard, HarperHubbardParams};
    use crate::spectral::BlockSpectrum;

    fn atomic(l1: usize, l2: usize) -> (Torus, FockBasis, HalfSpace) {
        let t = Torus::new(l1, l2).unwrap();
        let basis = FockBasis::new(&t, None).unwrap();
        let g = HalfSpace::new(t.clone(), 0.25).unwrap();
        (t, basis, g)
    }

    #[test]
    fn translation_split_is_a_column_charge() {
        let (t, basis, g) = atomic(4, 2);
        let ctx = SplitContext::new(&basis, &g);
        let th = translation(&t, &basis, 1).unwrap();
        let s = transport_split(&th.op, &ctx).unwrap();
        let q0 = charge_operator(&basis, &t.columns([0]));
        assert!(s.t_minus.add(&q0).unwrap().norm() < 1e-12);
        assert!(s.nu.abs() < 1e-12);
        assert!(s.leakage < 1e-12 && s.convention_residual < 1e-12);
    }

    #[test]
    fn atomic_filled_index() {
        let (t, basis, g) = atomic(4, 2);
        let params = HarperHubbardParams::free(0.0, 1.0, 0, 1);
        let h = build_harper_hubbard(&t, &params, &basis).unwrap();
        let spectrum = BlockSpectrum::new(&h.blocks(&basis).unwrap()).unwrap();
        let proj = spectrum.projection(None, 8).unwrap();
        assert_eq!(proj.p(), 1);
        let ctx = SplitContext::new(&basis, &g);
        let th = translation(&t, &basis, 1).unwrap();
        let (_, rep) = index_of(&th.op, &proj, &ctx).unwrap();
        assert!((rep.index + 2.0).abs() < 1e-12);
        assert!(rep.commutator.unwrap() < 1e-12);
    }

    #[test]
    fn composition_matches_direct_power() {
        let (t, basis, g) = atomic(4, 2);
        let ctx = SplitContext::new(&basis, &g);
        let th = translation(&t, &basis, 1).unwrap();
        let s = transport_split(&th.op, &ctx).unwrap();
        let s2 = power_split(&th.op, &s, 2, &ctx).unwrap();
        let expect = charge_operator(&basis, &t.columns([0, 1])).scale(C64::new(-1.0, 0.0));
        assert!(s2.t_minus.sub(&expect).unwrap().norm() < 1e-12);
        let a2 = transported_charge(&th.op.mul(&th.op).unwrap(), &ctx.q_gamma).unwrap();
        assert!(s2.a.sub(&a2).unwrap().norm() < 1e-12);
    }
}
