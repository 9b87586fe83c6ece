//! Diagonalization, gap certification, quasi-adiabatic filters, the dressed
//! charge and clustering diagnostics.

mod cluster;
mod dressed;
mod filter;

pub use cluster::{clustering_map, clustering_test, local_observables, toporder_test, SmoothStep};
pub use dressed::{quasi_adiabatic_k, time_integral_k, DressedCharge, TimeIntegralReport};
pub use filter::{smooth_step, FilterSpec, Interior, TimeGrid};

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::fock::{BlockOperator, FockBasis, SparseOperator};
use crate::linalg::{self, CMat, CVec, Eigh, C64};

/// Largest block handled by the dense eigensolver.
pub const DENSE_CAP: usize = 4096;

/// Spectral data of the low-energy patch.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GapReport {
    /// Lowest energies, ascending.
    pub energies: Vec<f64>,
    pub p: usize,
    /// `E_{p+1} − E_p`.
    pub gamma: f64,
    /// `E_p − E_1`.
    pub delta: f64,
    /// `γ > 2Δ`.
    pub admissible: bool,
}

impl GapReport {
    /// Picks the largest `p ≤ p_max` with `E_{p+1} − E_p > 2(E_p − E_1)`,
    /// unless `hint` fixes it.
    pub fn detect(energies: &[f64], hint: Option<usize>, p_max: usize) -> Result<Self> {
        if energies.len() < 2 {
            return Err(Error::Gap("fewer than two energies".into()));
        }
        let report = |p: usize| {
            let gamma = energies[p] - energies[p - 1];
            let delta = energies[p - 1] - energies[0];
            GapReport { energies: energies.to_vec(), p, gamma, delta, admissible: gamma > 2.0 * delta }
        };
        if let Some(p) = hint {
            if p == 0 || p >= energies.len() {
                return Err(Error::Gap(format!("hinted rank {p} out of range")));
            }
            return Ok(report(p));
        }
        let top = p_max.min(energies.len() - 1);
        let found = (1..=top).rev().find(|&p| report(p).admissible);
        Ok(match found {
            Some(p) => report(p),
            None => report(1),
        })
    }
}

/// Orthonormal frame of `ran(P)`, living in one particle-number block.
#[derive(Debug, Clone)]
pub struct GroundProjection {
    pub frame: CMat,
    pub block: usize,
    pub report: GapReport,
}

impl GroundProjection {
    pub fn p(&self) -> usize {
        self.frame.ncols()
    }

    /// `P` as a block operator.
    pub fn projector(&self, basis: &FockBasis) -> BlockOperator {
        let mut out = BlockOperator::zeros(basis);
        out.blocks[self.block] = &self.frame * self.frame.adjoint();
        out
    }

    /// `F* A F`.
    pub fn compress(&self, op: &BlockOperator) -> CMat {
        op.compress(self.block, &self.frame)
    }

    /// `Tr(P A)`.
    pub fn trace(&self, op: &BlockOperator) -> C64 {
        self.compress(op).trace()
    }

    /// `‖[A, P]‖` for Hermitian `A`, computed as `‖(1 − P) A P‖`.
    pub fn commutator_norm(&self, op: &BlockOperator) -> f64 {
        let af = &op.blocks[self.block] * &self.frame;
        let leak = &af - &self.frame * (self.frame.adjoint() * &af);
        linalg::norm2(&(leak.adjoint() * &leak)).sqrt()
    }

    /// Orthonormality defect `‖F*F − 1‖`.
    pub fn frame_residual(&self) -> f64 {
        linalg::unitarity_residual(&self.frame)
    }

    /// Projector onto the span of the columns of `frame` restricted to a subset.
    pub fn sub(&self, columns: &CMat) -> GroundProjection {
        GroundProjection { frame: &self.frame * columns, block: self.block, report: self.report.clone() }
    }
}

/// Dense eigen-decomposition of every block of a Hamiltonian.
#[derive(Debug, Clone)]
pub struct BlockSpectrum {
    pub blocks: Vec<Eigh>,
}

impl BlockSpectrum {
    pub fn new(h: &BlockOperator) -> Result<Self> {
        if let Some(big) = h.blocks.iter().map(|b| b.nrows()).find(|&d| d > DENSE_CAP) {
            return Err(Error::DimensionCap { dim: big, cap: DENSE_CAP });
        }
        Ok(Self { blocks: h.blocks.iter().map(Eigh::new).collect() })
    }

    /// All energies with their block, ascending.
    pub fn levels(&self) -> Vec<(f64, usize, usize)> {
        let mut out: Vec<(f64, usize, usize)> = self
            .blocks
            .iter()
            .enumerate()
            .flat_map(|(b, e)| e.values.iter().enumerate().map(move |(i, &v)| (v, b, i)))
            .collect();
        out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        out
    }

    pub fn projection(&self, hint: Option<usize>, p_max: usize) -> Result<GroundProjection> {
        let levels = self.levels();
        let keep = levels.len().min(64.max(p_max + 2));
        let energies: Vec<f64> = levels.iter().take(keep).map(|l| l.0).collect();
        let report = GapReport::detect(&energies, hint, p_max)?;
        let block = levels[0].1;
        if levels.iter().take(report.p).any(|l| l.1 != block) {
            return Err(Error::Gap("the low-energy patch spans several particle numbers".into()));
        }
        let vecs = &self.blocks[block].vectors;
        let cols: Vec<usize> = levels.iter().take(report.p).map(|l| l.2).collect();
        let mut frame = CMat::zeros(vecs.nrows(), cols.len());
        for (j, &c) in cols.iter().enumerate() {
            frame.set_column(j, &vecs.column(c));
        }
        Ok(GroundProjection { frame, block, report })
    }

    /// Lowest patch of a single block, i.e. at fixed particle number.
    pub fn projection_in(&self, block: usize, hint: Option<usize>, p_max: usize) -> Result<GroundProjection> {
        let e = self
            .blocks
            .get(block)
            .ok_or_else(|| Error::Gap(format!("block {block} out of range")))?;
        let keep = e.values.len().min(64.max(p_max + 2));
        let report = GapReport::detect(&e.values[..keep], hint, p_max)?;
        let frame = e.vectors.columns(0, report.p).into_owned();
        Ok(GroundProjection { frame, block, report })
    }

    /// `Σ f(E_j − E_k) <j|A|k> |j><k|` block by block.
    pub fn filter<F: Fn(f64) -> C64>(&self, op: &BlockOperator, f: F) -> BlockOperator {
        let blocks = self
            .blocks
            .iter()
            .zip(&op.blocks)
            .map(|(e, a)| {
                let mut m = e.to_eigenbasis(a);
                for j in 0..m.nrows() {
                    for k in 0..m.ncols() {
                        m[(j, k)] *= f(e.values[j] - e.values[k]);
                    }
                }
                e.from_eigenbasis(&m)
            })
            .collect();
        BlockOperator { blocks, support: None }
    }
}

/// Options for [`ground_projection`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapOptions {
    pub hint: Option<usize>,
    pub p_max: usize,
    pub lanczos_tol: f64,
    pub lanczos_max_iter: usize,
}

impl Default for GapOptions {
    fn default() -> Self {
        Self { hint: None, p_max: 8, lanczos_tol: 1e-10, lanczos_max_iter: 600 }
    }
}

/// Lowest patch of `h`: dense below [`DENSE_CAP`], Lanczos above.
pub fn ground_projection(h: &SparseOperator, basis: &FockBasis, opts: &GapOptions) -> Result<GroundProjection> {
    let mut levels: Vec<(f64, usize, CVec)> = Vec::new();
    for b in 0..basis.n_blocks() {
        let d = basis.block(b).dim();
        if d <= DENSE_CAP {
            let e = Eigh::new(&h.block_dense(basis, b));
            let take = d.min(64.max(opts.p_max + 2));
            for i in 0..take {
                levels.push((e.values[i], b, e.vectors.column(i).into_owned()));
            }
        } else {
            let k = opts.hint.unwrap_or(4) + 4;
            let res = linalg::lanczos_lowest(
                |v| h.block_apply(basis, b, v),
                d,
                k,
                opts.lanczos_tol,
                opts.lanczos_max_iter,
            )?;
            for (v, x) in res.values.into_iter().zip(res.vectors) {
                levels.push((v, b, x));
            }
        }
    }
    levels.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let energies: Vec<f64> = levels.iter().map(|l| l.0).collect();
    let report = GapReport::detect(&energies, opts.hint, opts.p_max)?;
    let block = levels[0].1;
    if levels.iter().take(report.p).any(|l| l.1 != block) {
        return Err(Error::Gap("the low-energy patch spans several particle numbers".into()));
    }
    let d = basis.block(block).dim();
    let mut frame = CMat::zeros(d, report.p);
    for (j, l) in levels.iter().take(report.p).enumerate() {
        frame.set_column(j, &l.2);
    }
    if linalg::unitarity_residual(&frame) > 1e-12 {
        frame = linalg::polar_unitary(&frame);
    }
    Ok(GroundProjection { frame, block, report })
}
